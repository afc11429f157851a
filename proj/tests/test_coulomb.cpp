#include <doctest.h>

#include "dflab/coulomb.hpp"
#include "dflab/grid.hpp"

#include <cmath>

using namespace dflab;

TEST_CASE("multipole potential: closed-form check for a simple source") {
    // t(s) = s^2 e^{-s}; for k = 0: u(r) = (1/r)\int_0^r t + \int_r^inf t/s
    auto g = build_grid(100, 35.0);
    std::vector<double> t(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double s = g.points()[i];
        t[i] = s * s * std::exp(-s);
    }
    auto pot = multipole_potential(g, t, 0);
    for (int i = 0; i < g.n_points(); i += 151) {
        const double r = g.points()[i];
        const double in = 2.0 - std::exp(-r) * (r * r + 2 * r + 2);
        const double out = std::exp(-r) * (r + 1.0);
        CHECK(std::abs(pot.u[i] - (in / r + out)) < 1e-12);
    }
    // derivative against the closed form d/dr(in/r + out); the floor covers
    // machine-epsilon amplification by 1/r^2 at the smallest radii
    for (int i = 0; i < g.n_points(); i += 151) {
        const double r = g.points()[i];
        const double in = 2.0 - std::exp(-r) * (r * r + 2 * r + 2);
        const double dud = -in / (r * r);
        CHECK(std::abs(pot.du[i] - dud) < 1e-12 + 1e-15 / (r * r));
    }
}

TEST_CASE("slater integral: symmetry and positivity") {
    auto g = build_grid(100, 35.0);
    std::vector<double> rho1(g.n_points()), rho2(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        rho1[i] = r * r * std::exp(-1.3 * r);
        rho2[i] = r * std::exp(-0.8 * r) * std::sin(0.3 * r);
    }
    for (int k : {0, 1, 2, 3}) {
        CHECK(slater_rk(g, rho1, rho2, k) == doctest::Approx(slater_rk(g, rho2, rho1, k)).epsilon(1e-13));
    }
    CHECK(slater_rk(g, rho1, rho1, 0) > 0.0);
}

TEST_CASE("slater integral: hydrogenic F0(1s,1s) = 5/8") {
    // point-Coulomb 1s density rho(r) = P^2 with P = 2 r e^{-r}
    auto g = build_grid(120, 35.0);
    std::vector<double> rho(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        const double p = 2.0 * r * std::exp(-r);
        rho[i] = p * p;
    }
    CHECK(std::abs(slater_rk(g, rho, rho, 0) - 0.625) < 1e-10);
}

TEST_CASE("slater integral against direct 2d quadrature") {
    // independent oracle: direct double sum over the product grid with the
    // kernel split at the diagonal (different algorithm, same integral)
    auto g = build_grid(90, 25.0);
    std::vector<double> rho1(g.n_points()), rho2(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        rho1[i] = r * r * std::exp(-1.1 * r) * (1.0 + 0.2 * std::cos(r));
        rho2[i] = r * std::exp(-0.9 * r);
    }
    for (int k : {0, 2}) {
        double direct = 0.0;
        for (int i = 0; i < g.n_points(); ++i)
            for (int j = 0; j < g.n_points(); ++j) {
                const double r = g.points()[i], s = g.points()[j];
                const double lo = std::min(r, s), hi = std::max(r, s);
                direct += g.weights()[i] * g.weights()[j] * rho1[i] * rho2[j] *
                          std::pow(lo, k) / std::pow(hi, k + 1);
            }
        CHECK(std::abs(slater_rk(g, rho1, rho2, k) - direct) < 2e-4 * std::abs(direct));
    }
}

TEST_CASE("input validation") {
    auto g = build_grid(64, 10.0);
    std::vector<double> ok(g.n_points(), 1.0), bad(10, 1.0);
    CHECK_THROWS(slater_rk(g, ok, bad, 0));
    CHECK_THROWS(multipole_potential(g, ok, -1));
}
