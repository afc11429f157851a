#include <doctest.h>

#include "dflab/sphfield.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace dflab;

namespace {

std::mt19937 rng(777);

const RadialGrid& test_grid() {
    static RadialGrid g = build_grid(64, 12.0);
    return g;
}

Eigen::VectorXcd random_radial(double scale = 1.0) {
    const auto& g = test_grid();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd v(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        v(i) = scale * std::exp(-0.7 * r) * cplx(u(rng), u(rng));
    }
    return v;
}

SpinorSH random_spinor(int lmax_content, int lmax_store) {
    SpinorSH phi(&test_grid(), lmax_store);
    for (int s = 0; s < 2; ++s)
        for (int l = 0; l <= lmax_content; ++l)
            for (int m = -l; m <= l; ++m) phi.spin(s).at(l, m) = random_radial();
    return phi;
}

RotationSU2 random_su2() {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Vector3d axis(u(rng), u(rng), u(rng));
    std::uniform_real_distribution<double> a(0.3, 5.0);
    return RotationSU2::axis_angle(axis, a(rng));
}

} // namespace

TEST_CASE("y product expansion matches pointwise products") {
    std::uniform_real_distribution<double> u(0.2, 2.8);
    for (int l1 = 0; l1 <= 3; ++l1)
        for (int m1 = -l1; m1 <= l1; ++m1)
            for (int l2 = 0; l2 <= 2; ++l2)
                for (int m2 = -l2; m2 <= l2; ++m2) {
                    const double th = u(rng), ph = u(rng);
                    cplx direct = spherical_y(l1, m1, th, ph) * spherical_y(l2, m2, th, ph);
                    cplx series = 0.0;
                    for (int L = std::abs(l1 - l2); L <= l1 + l2; ++L)
                        series += y_product_coeff(l1, m1, l2, m2, L) *
                                  spherical_y(L, m1 + m2, th, ph);
                    CHECK(std::abs(direct - series) < 1e-12);
                }
}

TEST_CASE("density product matches pointwise inner density") {
    auto a = random_spinor(2, 2);
    auto b = random_spinor(2, 2);
    auto rho = density_product(a, b, 4);
    std::uniform_real_distribution<double> u(0.2, 2.8);
    for (int trial = 0; trial < 6; ++trial) {
        const int g = trial * 97 % test_grid().n_points();
        const double th = u(rng), ph = u(rng);
        auto va = a.eval_point(g, th, ph);
        auto vb = b.eval_point(g, th, ph);
        cplx direct = std::conj(va(0)) * vb(0) + std::conj(va(1)) * vb(1);
        CHECK(std::abs(direct - rho.eval_point(g, th, ph)) < 1e-12);
    }

    // self-density is real and integrates to the squared norm
    auto self = density_product(a, a, 4);
    CHECK(std::abs(self.integral().imag()) < 1e-12);
    CHECK(std::abs(self.integral().real() - a.norm() * a.norm()) < 1e-10);

    // truncation reports a tail
    double tail = 0.0;
    density_product(a, b, 1, &tail);
    CHECK(tail > 0.0);
}

TEST_CASE("bullet rotation: pointwise, unitary, homomorphic") {
    auto phi = random_spinor(2, 2);
    auto A = random_su2();
    auto rphi = phi.rotate(A);

    CHECK(std::abs(phi.norm() - rphi.norm()) < 1e-12);

    auto rinv = su2_to_so3(A).transpose();
    std::uniform_real_distribution<double> u(0.2, 2.8);
    for (int trial = 0; trial < 6; ++trial) {
        const int g = (trial * 131) % test_grid().n_points();
        const double th = u(rng), ph = u(rng);
        Eigen::Vector3d x(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        Eigen::Vector3d xr = rinv * x;
        const double thr = std::acos(std::clamp(xr.z(), -1.0, 1.0));
        const double phr = std::atan2(xr.y(), xr.x());
        Eigen::Vector2cd expect = A.m * phi.eval_point(g, thr, phr);
        Eigen::Vector2cd got = rphi.eval_point(g, th, ph);
        CHECK((expect - got).norm() < 1e-11);
    }

    auto B = random_su2();
    auto ab1 = phi.rotate(B).rotate(A);
    auto ab2 = phi.rotate(A * B);
    for (int s = 0; s < 2; ++s)
        for (auto [l, m] : ab2.spin(s).components()) {
            const auto* x1 = ab1.spin(s).find(l, m);
            REQUIRE(x1 != nullptr);
            CHECK((*x1 - *ab2.spin(s).find(l, m)).norm() < 1e-11);
        }
}

TEST_CASE("hartree potential: monopole tail and orthogonality") {
    const auto& g = test_grid();
    // radial density of mass 2.5
    ScalarSH rho(&g, 2);
    Eigen::VectorXcd t(g.n_points());
    double raw = 0.0;
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        t(i) = std::exp(-2.0 * r);
        raw += g.weights()[i] * r * r * std::exp(-2.0 * r);
    }
    const double mass = 2.5;
    t *= mass / (std::sqrt(4.0 * M_PI) * raw);
    rho.at(0, 0) = t;
    CHECK(std::abs(rho.integral().real() - mass) < 1e-12);

    auto pot = hartree_potential(rho);
    // far outside the density the potential is mass/r along any direction
    const int glast = g.n_points() - 3;
    const double r = g.points()[glast];
    CHECK(std::abs(pot.u.eval_point(glast, 1.1, 0.4).real() - mass / r) < 1e-8 * mass / r);

    // pure l=1 density has no monopole
    ScalarSH dip(&g, 2);
    dip.at(1, 0) = t;
    auto dpot = hartree_potential(dip);
    CHECK(!dpot.u.has(0, 0));
}

TEST_CASE("hartree potential against direct 3d quadrature") {
    const auto& g = test_grid();
    // closed-form density components so the oracle can evaluate off-grid;
    // the decay keeps the far samples outside the density
    auto radial = [](int l, double r) { return std::pow(r, l) * std::exp(-2.5 * r); };
    struct Comp {
        int l, m;
        cplx c;
    };
    std::vector<Comp> comps{{0, 0, {0.8, 0.0}}, {1, 0, {0.4, 0.0}}, {1, 1, {0.3, -0.2}},
                            {2, -1, {-0.15, 0.25}}};
    ScalarSH rho(&g, 2);
    for (const auto& cm : comps) {
        Eigen::VectorXcd t(g.n_points());
        for (int i = 0; i < g.n_points(); ++i) t(i) = cm.c * radial(cm.l, g.points()[i]);
        rho.at(cm.l, cm.m) = t;
    }
    auto pot = hartree_potential(rho);

    // interior samples on the z axis: only m = 0 components survive the
    // phi integral; the c and radial integrals are done adaptively with the
    // kink at ry = rx split out
    auto legendre = [](int l, double x) {
        double p0 = 1.0, p1 = x;
        if (l == 0) return 1.0;
        for (int k = 2; k <= l; ++k) {
            const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        return p1;
    };
    std::function<double(const std::function<double(double)>&, double, double, double, int)>
        simpson = [&](const std::function<double(double)>& f, double a, double b, double tol,
                      int depth) -> double {
        const double m = 0.5 * (a + b);
        const double s1 = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double s2 = (b - a) / 12.0 * (f(a) + 4.0 * f(lm) + 2.0 * f(m) + 4.0 * f(rm) + f(b));
        if (depth <= 0 || std::abs(s2 - s1) < 15.0 * tol) return s2 + (s2 - s1) / 15.0;
        return simpson(f, a, m, 0.5 * tol, depth - 1) + simpson(f, m, b, 0.5 * tol, depth - 1);
    };

    for (int gx : {180, 320}) {
        const double rx = g.points()[gx];
        cplx direct = 0.0;
        for (const auto& cm : comps) {
            if (cm.m != 0) continue;
            auto cint = [&](double ry) {
                // substitute c = 1 - u^2 so the ry = rx endpoint stays finite
                auto fu = [&](double u) {
                    const double dd = (rx - ry) * (rx - ry) + 2.0 * rx * ry * u * u;
                    if (dd == 0.0) return 2.0 / std::sqrt(2.0 * rx * ry); // u = 0, ry = rx
                    return legendre(cm.l, 1.0 - u * u) * 2.0 * u / std::sqrt(dd);
                };
                return simpson(fu, 0.0, std::sqrt(2.0), 1e-12, 30);
            };
            auto fr = [&](double ry) { return ry * ry * radial(cm.l, ry) * cint(ry); };
            const double pref = 2.0 * M_PI * std::sqrt((2.0 * cm.l + 1) / (4.0 * M_PI));
            direct += cm.c * pref *
                      (simpson(fr, 0.0, rx, 1e-11, 30) + simpson(fr, rx, g.rbox(), 1e-11, 30));
        }
        cplx series = pot.u.eval_point(gx, 0.0, 0.0);
        CHECK(std::abs(direct - series) < 1e-6);
    }

    // far-region samples (density decayed below 1e-9): all multipoles
    // contribute and the direct angular-radial sum is smooth
    auto rule = gauss_legendre(32);
    for (int gx : {600, 620}) {
        const double rx = g.points()[gx];
        const double thx = 1.2, phx = 0.7;
        Eigen::Vector3d x(rx * std::sin(thx) * std::cos(phx), rx * std::sin(thx) * std::sin(phx),
                          rx * std::cos(thx));
        cplx direct = 0.0;
        const int nph = 48;
        for (int i = 0; i < 32; ++i) {
            const double th = std::acos(rule.nodes[i]);
            for (int j = 0; j < nph; ++j) {
                const double ph = 2.0 * M_PI * j / nph;
                Eigen::Vector3d yhat(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                     std::cos(th));
                for (int gq = 0; gq < g.n_points(); ++gq) {
                    const double ry = g.points()[gq];
                    const double dist = (x - ry * yhat).norm();
                    direct += g.weights()[gq] * ry * ry * rule.weights[i] * (2.0 * M_PI / nph) *
                              rho.eval_point(gq, th, ph) / dist;
                }
            }
        }
        cplx series = pot.u.eval_point(gx, thx, phx);
        CHECK(std::abs(direct - series) < 1e-7);
    }
}

TEST_CASE("gradient field: closed forms and finite differences") {
    const auto& g = test_grid();
    const double s43 = std::sqrt(4.0 * M_PI / 3.0);

    // u = z: gradient is the constant unit vector e_z
    PotentialSH lin{ScalarSH(&g, 1), ScalarSH(&g, 1)};
    Eigen::VectorXcd rr(g.n_points()), one(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        rr(i) = s43 * g.points()[i];
        one(i) = s43;
    }
    lin.u.at(1, 0) = rr;
    lin.du.at(1, 0) = one;
    auto grad = gradient_field(lin);
    for (int trial = 0; trial < 4; ++trial) {
        auto v = grad.eval_point_cartesian(40 * trial + 7, 0.3 + 0.5 * trial, 1.0 + trial);
        CHECK(std::abs(v(0)) < 1e-12);
        CHECK(std::abs(v(1)) < 1e-12);
        CHECK(std::abs(v(2) - cplx(1.0)) < 1e-12);
    }

    // finite differences on the evaluated potential; the density is smooth
    // (the FD oracle differentiates the potential, so rough tables would
    // only measure their own roughness)
    ScalarSH rho(&g, 2);
    Eigen::VectorXcd t0(g.n_points()), t1(g.n_points()), t2(g.n_points());
    for (int i = 0; i < g.n_points(); ++i) {
        const double r = g.points()[i];
        t0(i) = std::exp(-0.7 * r) * cplx(0.3, -0.1);
        t1(i) = std::exp(-0.8 * r) * cplx(0.2, 0.4);
        t2(i) = r * std::exp(-0.9 * r) * cplx(-0.1, 0.2);
    }
    rho.at(0, 0) = t0;
    rho.at(1, 0) = t1;
    rho.at(2, 2) = t2;
    auto pot = hartree_potential(rho);
    auto field = field_convolution(rho); // = -grad u

    const int nq = g.points_per_interval();
    for (int sample = 0; sample < 4; ++sample) {
        // interior quadrature point with two neighbors on each side inside
        // the same interval
        const int gx = (13 + sample * 9) * nq + 4;
        const double r = g.points()[gx];
        const double th = 0.8 + 0.3 * sample, ph = 0.5 + 0.7 * sample;

        // radial derivative: 5-point Lagrange derivative on the (nonuniform)
        // quadrature radii
        cplx dur = 0.0;
        for (int a = -2; a <= 2; ++a) {
            double dl = 0.0; // l_a'(r_gx)
            for (int b = -2; b <= 2; ++b) {
                if (b == a) continue;
                double term = 1.0 / (g.points()[gx + a] - g.points()[gx + b]);
                for (int m = -2; m <= 2; ++m) {
                    if (m == a || m == b) continue;
                    term *= (r - g.points()[gx + m]) /
                            (g.points()[gx + a] - g.points()[gx + m]);
                }
                dl += term;
            }
            dur += dl * pot.u.eval_point(gx + a, th, ph);
        }
        // angular derivatives at fixed radius
        const double h = 1e-5;
        cplx duth = (pot.u.eval_point(gx, th + h, ph) - pot.u.eval_point(gx, th - h, ph)) / (2 * h);
        cplx duph = (pot.u.eval_point(gx, th, ph + h) - pot.u.eval_point(gx, th, ph - h)) / (2 * h);

        Eigen::Vector3d er(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        Eigen::Vector3d eth(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th));
        Eigen::Vector3d eph(-std::sin(ph), std::cos(ph), 0.0);

        Eigen::Vector3cd fd = dur * er + (duth / r) * eth + (duph / (r * std::sin(th))) * eph;
        Eigen::Vector3cd lib = -field.eval_point_cartesian(gx, th, ph); // field = -grad u
        CHECK((fd - lib).norm() < 1e-7 * std::max(1.0, lib.norm()));
    }

    // Gauss law: unit-mass radial density gives 1/r^2 far field
    ScalarSH unit(&g, 1);
    Eigen::VectorXcd t = random_radial();
    ScalarSH tmp(&g, 0);
    for (int i = 0; i < g.n_points(); ++i) t(i) = std::exp(-3.0 * g.points()[i]);
    unit.at(0, 0) = t;
    const double mass = unit.integral().real();
    auto efield = field_convolution(unit);
    const int gfar = g.n_points() - 5;
    const double rfar = g.points()[gfar];
    auto vfar = efield.eval_point_cartesian(gfar, 0.6, 0.2);
    Eigen::Vector3d nfar(std::sin(0.6) * std::cos(0.2), std::sin(0.6) * std::sin(0.2),
                         std::cos(0.6));
    CHECK((vfar - cplx(mass / (rfar * rfar)) * nfar.cast<cplx>()).norm() < 1e-9 * mass / (rfar * rfar));

    // zero density, zero field
    ScalarSH zero(&g, 1);
    auto zf = field_convolution(zero);
    CHECK(zf.comp[0].components().empty());
    CHECK(zf.comp[1].components().empty());
    CHECK(zf.comp[2].components().empty());
}

TEST_CASE("sigma dot xhat matches the pointwise matrix") {
    auto phi = random_spinor(1, 1);
    auto res = sigma_dot_xhat(phi);
    std::uniform_real_distribution<double> u(0.2, 2.8);
    for (int trial = 0; trial < 6; ++trial) {
        const int g = (trial * 83) % test_grid().n_points();
        const double th = u(rng), ph = u(rng);
        Eigen::Matrix2cd m;
        m << std::cos(th), std::sin(th) * std::exp(cplx(0, -ph)),
            std::sin(th) * std::exp(cplx(0, ph)), -std::cos(th);
        Eigen::Vector2cd expect = m * phi.eval_point(g, th, ph);
        CHECK((expect - res.eval_point(g, th, ph)).norm() < 1e-12);
    }
}

TEST_CASE("surface dot equals angular quadrature") {
    auto a = random_spinor(2, 2);
    auto b = random_spinor(2, 2);
    auto sd = surface_dot(a, b);

    const int nth = 30, nph = 48;
    auto rule = gauss_legendre(nth);
    const int g = 200;
    cplx direct = 0.0;
    for (int i = 0; i < nth; ++i) {
        const double th = std::acos(rule.nodes[i]);
        for (int j = 0; j < nph; ++j) {
            const double ph = 2.0 * M_PI * j / nph;
            auto va = a.eval_point(g, th, ph);
            auto vb = b.eval_point(g, th, ph);
            direct += rule.weights[i] * (2.0 * M_PI / nph) *
                      (std::conj(va(0)) * vb(0) + std::conj(va(1)) * vb(1));
        }
    }
    CHECK(std::abs(direct - sd(g)) < 1e-12);
}
