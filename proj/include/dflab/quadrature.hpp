#pragma once

#include <vector>

namespace dflab {

/// Gauss-Legendre rule on [-1,1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    /// Partial integration matrix: part(g,j) = \int_{-1}^{x_g} l_j(x) dx,
    /// l_j the Lagrange cardinal polynomials of the rule's nodes. Applying it
    /// to sampled values gives the integral of the degree n-1 interpolant up
    /// to each node, which is how cumulative radial integrals keep quadrature
    /// accuracy inside an interval.
    std::vector<double> partial; // row-major n x n

    double partial_at(int g, int j) const { return partial[static_cast<size_t>(g) * nodes.size() + j]; }
};

GaussRule gauss_legendre(int n);

} // namespace dflab
