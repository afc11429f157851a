#pragma once

#include "dflab/quadrature.hpp"

#include <memory>
#include <span>
#include <vector>

namespace dflab {

/// Exponential-linear radial mapping r(t) = a(e^{bt}-1) + d t, t in [0,1].
/// `a` is derived from the box size unless set explicitly (> 0).
struct GridMapping {
    double a = 0.0;
    double b = 4.0;
    double d = 0.0;
};

/// Shared radial grid: breakpoints for the spline basis plus a composite
/// Gauss rule used for every radial integral in the code. All radial
/// functions are tabulated on the quadrature points.
class RadialGrid {
  public:
    RadialGrid() = default;
    RadialGrid(std::vector<double> breakpoints, int points_per_interval);

    int n_intervals() const { return static_cast<int>(breaks_.size()) - 1; }
    int n_points() const { return static_cast<int>(x_.size()); }
    int points_per_interval() const { return nq_; }
    double rbox() const { return breaks_.back(); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& points() const { return x_; }
    const std::vector<double>& weights() const { return w_; }
    const GaussRule& rule() const { return rule_; }
    const GridMapping& mapping() const { return map_; }

    double integrate(std::span<const double> f) const;

    /// In[g] = integral of f from 0 to x_g (f given on quadrature points).
    std::vector<double> cumulative_inward(std::span<const double> f) const;
    /// Out[g] = integral of f from x_g to rbox().
    std::vector<double> cumulative_outward(std::span<const double> f) const;

    /// In[g] = integral of s^k t(s) from 0 to x_g, exact for the per-interval
    /// interpolant of the smooth factor t.
    std::vector<double> cumulative_inward_weighted(std::span<const double> t, int k) const;
    /// Out[g] = integral of s^{-kp1} t(s) from x_g to rbox(); the negative
    /// power is integrated analytically against the interpolant of t, which
    /// keeps high multipole orders accurate near the origin.
    std::vector<double> cumulative_outward_weighted(std::span<const double> t, int kp1) const;

    GridMapping map_; // informational; set by build_grid

  private:
    struct MomentTables; // per-power weighted moment matrices
    struct MomentCache;
    const MomentTables& moments(bool outward, int power) const;

    std::vector<double> breaks_;
    int nq_ = 0;
    GaussRule rule_;
    std::vector<double> x_, w_;
    std::shared_ptr<MomentCache> mcache_; // shared across copies
};

/// Build the shared grid: M breakpoint nodes on [0, rbox] under the
/// exponential-linear mapping. `min_radius_covered` guards against a box
/// smaller than the nuclear support.
RadialGrid build_grid(int m_nodes, double rbox, GridMapping mapping = {},
                      double min_radius_covered = 0.0, int points_per_interval = 10);

} // namespace dflab
