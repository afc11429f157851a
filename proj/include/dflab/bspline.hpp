#pragma once

#include <vector>

namespace dflab {

/// B-spline basis on a clamped knot vector built from breakpoints.
/// Order k means polynomial degree k-1; the basis is C^{k-2} across
/// breakpoints.
class BSplineBasis {
  public:
    BSplineBasis() = default;
    BSplineBasis(std::vector<double> breakpoints, int order);

    int order() const { return order_; }
    int size() const { return n_; } // number of B-splines
    const std::vector<double>& breakpoints() const { return breaks_; }

    /// Index of the first B-spline that is nonzero on breakpoint interval iv.
    int first_on_interval(int iv) const { return iv; }

    /// Evaluate the `order` B-splines supported on breakpoint interval iv at
    /// x (which must lie in that interval), with derivatives 0..nder.
    /// out[d][j] is the d-th derivative of spline first_on_interval(iv)+j.
    void eval_on_interval(int iv, double x, int nder,
                          std::vector<std::vector<double>>& out) const;

  private:
    std::vector<double> breaks_;
    std::vector<double> knots_;
    int order_ = 0;
    int n_ = 0;
};

} // namespace dflab
