#pragma once

#include "dflab/angular.hpp"
#include "dflab/bspline.hpp"
#include "dflab/grid.hpp"

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace dflab {

using Potential = std::function<double(double)>;

/// Spline tables on the shared grid with the two boundary splines removed
/// (P = Q = 0 at both ends of the box).
class RadialBasis {
  public:
    RadialBasis() = default;
    explicit RadialBasis(RadialGrid grid, int order = 7);

    const RadialGrid& grid() const { return grid_; }
    int order() const { return order_; }
    int n() const { return n_; } // kept splines per component

    /// d-th derivative (0..2) of the loc-th spline supported at quadrature
    /// point g (global spline index = interval(g) + loc).
    double local(int d, int g, int loc) const {
        return tab_[d][static_cast<size_t>(g) * order_ + loc];
    }
    /// kept-spline index of (g, loc); -1 if it is a dropped boundary spline
    int kept_index(int g, int loc) const {
        const int jg = g / grid_.points_per_interval() + loc;
        return (jg >= 1 && jg <= n_) ? jg - 1 : -1;
    }

    /// dense table of kept spline j (d-th derivative) on all points
    std::vector<double> tabulate(int d, int j) const;

  private:
    RadialGrid grid_;
    int order_ = 0;
    int n_ = 0;
    std::vector<double> tab_[3]; // n_points x order, local layout
};

struct RadialOrbital {
    Channel channel;
    double lambda = 0.0;      // eigenvalue; includes the +c^2 rest energy for Dirac
    std::vector<double> p, q; // radial amplitudes on quadrature points (q empty for Schrodinger)
    std::vector<double> dp;   // radial derivative of p
    int nodes = 0;            // sign changes of p
    bool gap_state = false;   // 0 < lambda < c^2
    bool spurious = false;    // no nonrelativistic partner (diagnostic)
};

struct ChannelSpectrum {
    Channel channel;
    std::vector<RadialOrbital> all;                 // sorted ascending
    std::vector<const RadialOrbital*> gap() const;  // discrete states in (0, c^2)
    std::vector<const RadialOrbital*> negative() const; // lambda < 0, closest to the gap first
};

/// Assembled DKB generalized eigenproblem blocks for one channel.
struct ChannelMatrices {
    Eigen::MatrixXd h, s; // 2n x 2n, symmetric; s positive definite
};

ChannelMatrices channel_matrix(const Channel& ch, double c, const Potential& v,
                               const RadialBasis& basis);

ChannelSpectrum solve_channel(const Channel& ch, double c, const Potential& v,
                              const RadialBasis& basis);

/// Nonrelativistic radial channel -u''/2 + (V + l(l+1)/2r^2) u = mu u on the
/// same spline space; doubles as the oracle for the c -> infinity limit.
std::vector<RadialOrbital> schrodinger_channel(int l, const Potential& v,
                                               const RadialBasis& basis);

struct Shell {
    double lambda = 0.0;
    int dim = 0;                    // sum of channel degeneracies 2|kappa|
    std::vector<int> kappas;        // contributing channels
    std::vector<std::pair<int, int>> members; // (channel index, orbital index within gap list)
};

struct SpectrumTable {
    double c = 0.0;
    std::vector<Shell> shells;
    std::string to_csv() const;
};

/// Merge solved channels into degenerate shells. Shells separated by less
/// than 10x the cluster tolerance (but more than the tolerance) are refused
/// as ambiguous.
SpectrumTable assemble_spectrum(const std::vector<ChannelSpectrum>& channels, double c,
                                double cluster_tol, int max_shells = 8);

/// Convenience: solve all channels |kappa| <= kmax (in the fixed order
/// -1, +1, -2, +2, ...).
std::vector<ChannelSpectrum> solve_channels(int kmax, double c, const Potential& v,
                                            const RadialBasis& basis);

struct NonrelLimitRow {
    double c;
    int kappa;
    int index; // state index within the channel
    double dirac_shift; // lambda - c^2
    double mu;
    double error;
};

struct NonrelLimitStudy {
    std::vector<NonrelLimitRow> rows;
    double slope_first_state = 0.0; // log-log fit of the lowest state's error vs c
    std::string to_csv() const;
};

NonrelLimitStudy nonrel_limit_study(const std::vector<double>& c_list, const Potential& v,
                                    const RadialBasis& basis, int kmax = 1, int states = 2);

} // namespace dflab
