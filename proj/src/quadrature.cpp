#include "dflab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dflab {

namespace {

// Legendre P_n and derivative at x.
std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

// Barycentric weights for Lagrange interpolation on given nodes.
std::vector<double> bary_weights(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> w(n, 1.0);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (k != j) w[j] /= (x[j] - x[k]);
    return w;
}

} // namespace

GaussRule gauss_legendre(int n) {
    if (n < 2) throw std::invalid_argument("gauss_legendre: need n >= 2");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess, Newton to machine precision.
        double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 60; ++it) {
            auto [p, dp] = legendre_pair(n, x);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        auto [p, dp] = legendre_pair(n, x);
        (void)p;
        rule.nodes[i] = x;
        rule.nodes[n - 1 - i] = -x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }

    // partial(g,j) = \int_{-1}^{x_g} l_j.  The integrand has degree n-1, so a
    // Gauss rule with n points on the subinterval is exact; l_j is evaluated
    // with the barycentric formula.
    const auto bw = bary_weights(rule.nodes);
    rule.partial.assign(static_cast<size_t>(n) * n, 0.0);
    auto lagrange = [&](int j, double x) {
        // exact hit on a node
        for (int k = 0; k < n; ++k)
            if (x == rule.nodes[k]) return (k == j) ? 1.0 : 0.0;
        double num = bw[j] / (x - rule.nodes[j]);
        double den = 0.0;
        for (int k = 0; k < n; ++k) den += bw[k] / (x - rule.nodes[k]);
        return num / den;
    };
    for (int g = 0; g < n; ++g) {
        const double a = -1.0, b = rule.nodes[g];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int q = 0; q < n; ++q)
                s += rule.weights[q] * lagrange(j, mid + half * rule.nodes[q]);
            rule.partial[static_cast<size_t>(g) * n + j] = half * s;
        }
    }
    return rule;
}

} // namespace dflab
