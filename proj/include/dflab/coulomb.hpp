#pragma once

#include "dflab/grid.hpp"

#include <span>
#include <vector>

namespace dflab {

/// Radial multipole transform of a source t(s):
///   u(r) = r^{-(k+1)} \int_0^r s^k t ds + r^k \int_r^R s^{-(k+1)} t ds.
/// du is exact (the local integrand contributions cancel), so downstream
/// field evaluations never need numerical differentiation.
struct RadialPotential {
    std::vector<double> u, du;
};

RadialPotential multipole_potential(const RadialGrid& grid, std::span<const double> t, int k);

/// Slater integral \int\int rho1(r) (r_<^k / r_>^{k+1}) rho2(s) dr ds via the
/// in/out cumulative algorithm, O(grid points).
double slater_rk(const RadialGrid& grid, std::span<const double> rho1,
                 std::span<const double> rho2, int k);

} // namespace dflab
