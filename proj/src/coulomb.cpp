#include "dflab/coulomb.hpp"

#include <cmath>
#include <stdexcept>

namespace dflab {

RadialPotential multipole_potential(const RadialGrid& grid, std::span<const double> t, int k) {
    if (k < 0) throw std::invalid_argument("multipole_potential: k must be >= 0");
    const int np = grid.n_points();
    const auto a = grid.cumulative_inward_weighted(t, k);
    const auto b = grid.cumulative_outward_weighted(t, k + 1);

    RadialPotential out;
    out.u.resize(np);
    out.du.resize(np);
    for (int g = 0; g < np; ++g) {
        const double r = grid.points()[g];
        const double rk = std::pow(r, k);
        const double rmk1 = std::pow(r, -(k + 1));
        out.u[g] = rmk1 * a[g] + rk * b[g];
        // the local integrand contributions cancel; only the prefactors differentiate
        out.du[g] = -(k + 1) * rmk1 / r * a[g] + (k == 0 ? 0.0 : k * rk / r * b[g]);
    }
    return out;
}

double slater_rk(const RadialGrid& grid, std::span<const double> rho1,
                 std::span<const double> rho2, int k) {
    if (rho1.size() != static_cast<size_t>(grid.n_points()) || rho2.size() != rho1.size())
        throw std::invalid_argument("slater_rk: density tables must live on the shared grid");
    // kernel symmetry is kept structural by averaging the two transform orders
    const auto p2 = multipole_potential(grid, rho2, k);
    const auto p1 = multipole_potential(grid, rho1, k);
    double s = 0.0;
    for (int g = 0; g < grid.n_points(); ++g)
        s += 0.5 * grid.weights()[g] * (rho1[g] * p2.u[g] + rho2[g] * p1.u[g]);
    return s;
}

} // namespace dflab
