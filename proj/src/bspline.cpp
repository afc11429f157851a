#include "dflab/bspline.hpp"

#include <cmath>
#include <stdexcept>

namespace dflab {

BSplineBasis::BSplineBasis(std::vector<double> breakpoints, int order)
    : breaks_(std::move(breakpoints)), order_(order) {
    if (order_ < 2) throw std::invalid_argument("BSplineBasis: order must be >= 2");
    if (breaks_.size() < 2) throw std::invalid_argument("BSplineBasis: need >= 2 breakpoints");
    for (size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1]))
            throw std::invalid_argument("BSplineBasis: breakpoints not increasing");
    // clamped knot vector
    knots_.assign(order_, breaks_.front());
    knots_.insert(knots_.end(), breaks_.begin() + 1, breaks_.end() - 1);
    knots_.insert(knots_.end(), order_, breaks_.back());
    n_ = static_cast<int>(knots_.size()) - order_;
}

// Derivative-capable basis evaluation (NURBS-book DersBasisFuns).
void BSplineBasis::eval_on_interval(int iv, double x, int nder,
                                    std::vector<std::vector<double>>& out) const {
    const int p = order_ - 1; // degree
    const int span = iv + p;  // knot span index for clamped vector
    const int nd = std::min(nder, p);

    out.assign(nder + 1, std::vector<double>(order_, 0.0));

    std::vector<std::vector<double>> ndu(order_, std::vector<double>(order_));
    std::vector<double> left(order_), right(order_);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) out[0][j] = ndu[j][p];

    std::vector<std::vector<double>> a(2, std::vector<double>(order_));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            int j1 = (rk >= -1) ? 1 : -rk;
            int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) out[k][j] *= factor;
        factor *= (p - k);
    }
}

} // namespace dflab
