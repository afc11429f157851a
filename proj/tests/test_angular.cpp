#include <doctest.h>

#include "dflab/angular.hpp"

#include <cmath>
#include <random>

using namespace dflab;

namespace {

// independent Racah-sum oracle in long double, written directly from the
// closed form (no shared code with the library path)
long double fact(int n) {
    long double f = 1.0L;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double three_j_oracle(double j1, double j2, double j3, double m1, double m2, double m3) {
    if (std::abs(m1 + m2 + m3) > 1e-12) return 0.0;
    auto i = [](double x) { return static_cast<int>(std::llround(x)); };
    if (i(2 * j3) < std::abs(i(2 * j1) - i(2 * j2)) || i(2 * j3) > i(2 * j1) + i(2 * j2)) return 0.0;
    long double delta = fact(i(j1 + j2 - j3)) * fact(i(j1 - j2 + j3)) * fact(i(-j1 + j2 + j3)) /
                        fact(i(j1 + j2 + j3 + 1));
    long double pref = fact(i(j1 + m1)) * fact(i(j1 - m1)) * fact(i(j2 + m2)) * fact(i(j2 - m2)) *
                       fact(i(j3 + m3)) * fact(i(j3 - m3));
    long double sum = 0.0L;
    for (int t = 0; t <= i(j1 + j2 + j3); ++t) {
        int a = i(j1 + j2 - j3) - t;
        int b = i(j1 - m1) - t;
        int c = i(j2 + m2) - t;
        int d = i(j3 - j2 + m1) + t;
        int e = i(j3 - j1 - m2) + t;
        if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
        long double term = 1.0L / (fact(t) * fact(a) * fact(b) * fact(c) * fact(d) * fact(e));
        sum += (t % 2) ? -term : term;
    }
    long double val = std::sqrt(delta * pref) * sum;
    if (i(j1 - j2 - m3) % 2) val = -val;
    return static_cast<double>(val);
}

std::mt19937 rng(12345);

RotationSU2 random_su2() {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Vector3d axis(u(rng), u(rng), u(rng));
    std::uniform_real_distribution<double> a(0.0, 2.0 * M_PI);
    return RotationSU2::axis_angle(axis, a(rng));
}

} // namespace

TEST_CASE("three_j against the explicit Racah oracle") {
    // spec example: (1/2 1/2 0; 1/2 -1/2 0)
    CHECK(three_j(1, 1, 0, 1, -1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    // triangle violation
    CHECK(three_j(1, 1, 4, 1, -1, 0) == 0.0);

    for (int tj1 = 0; tj1 <= 8; ++tj1)
        for (int tj2 = 0; tj2 <= 8; ++tj2)
            for (int tj3 = std::abs(tj1 - tj2); tj3 <= tj1 + tj2; tj3 += 2)
                for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2)
                    for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2) {
                        int tm3 = -tm1 - tm2;
                        if (std::abs(tm3) > tj3) continue;
                        double lib = three_j(tj1, tj2, tj3, tm1, tm2, tm3);
                        double orc = three_j_oracle(tj1 / 2.0, tj2 / 2.0, tj3 / 2.0, tm1 / 2.0,
                                                    tm2 / 2.0, tm3 / 2.0);
                        CHECK(lib == doctest::Approx(orc).epsilon(1e-12));
                    }

    // larger js still finite and accurate
    CHECK(three_j(40, 40, 40, 2, 0, -2) ==
          doctest::Approx(three_j_oracle(20, 20, 20, 1, 0, -1)).epsilon(1e-10));
}

TEST_CASE("three_j orthogonality by brute force") {
    for (int tj3 : {0, 2, 4, 3}) {
        const int tj1 = 3, tj2 = 3; // j1 = j2 = 3/2
        if ((tj1 + tj2 + tj3) % 2) continue;
        for (int tm3 = -tj3; tm3 <= tj3; tm3 += 2) {
            double s = 0.0;
            for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2)
                for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2) {
                    double w = three_j(tj1, tj2, tj3, tm1, tm2, -tm3 + 0);
                    if (tm1 + tm2 - tm3 != 0) continue;
                    w = three_j(tj1, tj2, tj3, tm1, tm2, -tm3);
                    s += (tj3 + 1) * w * w;
                }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("clebsch_gordan table values") {
    CHECK(clebsch_gordan(2, 0, 1, 1, 3, 1) == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(clebsch_gordan(2, 2, 1, -1, 3, 1) == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK(clebsch_gordan(2, 0, 1, 1, 1, 1) == doctest::Approx(-std::sqrt(1.0 / 3.0)));
    CHECK(clebsch_gordan(2, 2, 1, -1, 1, 1) == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("covering map basics") {
    auto I = RotationSU2::identity();
    CHECK((su2_to_so3(I) - Eigen::Matrix3d::Identity()).norm() < 1e-14);

    RotationSU2 minus((-Eigen::Matrix2cd::Identity()).eval());
    CHECK((su2_to_so3(minus) - Eigen::Matrix3d::Identity()).norm() < 1e-14);

    const double th = M_PI / 3.0;
    auto az = RotationSU2::axis_angle({0, 0, 1}, th);
    Eigen::Matrix3d rz;
    rz << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
    CHECK((su2_to_so3(az) - rz).norm() < 1e-12);

    // defining identity on the coordinate axes
    const cplx im(0, 1);
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -im, im, 0;
    sz << 1, 0, 0, -1;
    std::array<Eigen::Matrix2cd, 3> sigma{sx, sy, sz};
    auto a = random_su2();
    auto r = su2_to_so3(a);
    for (int j = 0; j < 3; ++j) {
        Eigen::Matrix2cd lhs = Eigen::Matrix2cd::Zero();
        for (int i = 0; i < 3; ++i) lhs += r(i, j) * sigma[i];
        Eigen::Matrix2cd rhs = a.m * sigma[j] * a.m.adjoint();
        CHECK((lhs - rhs).norm() < 1e-12);
    }

    // homomorphism
    auto b = random_su2();
    CHECK((su2_to_so3(a * b) - su2_to_so3(a) * su2_to_so3(b)).norm() < 1e-12);

    Eigen::Matrix2cd bad;
    bad << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS(RotationSU2(bad));
}

TEST_CASE("wigner blocks") {
    auto a = random_su2();
    CHECK((wigner_block(1, a) - a.m).norm() < 1e-14);

    RotationSU2 minus((-Eigen::Matrix2cd::Identity()).eval());
    for (int tj : {0, 2, 4}) {
        auto d = wigner_block(tj, minus);
        CHECK((d - Eigen::MatrixXcd::Identity(tj + 1, tj + 1)).norm() < 1e-12);
    }
    for (int tj : {1, 3, 5}) {
        auto d = wigner_block(tj, minus);
        CHECK((d + Eigen::MatrixXcd::Identity(tj + 1, tj + 1)).norm() < 1e-12);
    }

    for (int tj : {1, 2, 3, 4, 7}) {
        auto x = random_su2(), y = random_su2();
        auto dx = wigner_block(tj, x), dy = wigner_block(tj, y);
        CHECK((dx * dy - wigner_block(tj, x * y)).norm() < 1e-12);
        CHECK((dx * dx.adjoint() - Eigen::MatrixXcd::Identity(tj + 1, tj + 1)).norm() < 1e-12);
    }
}

TEST_CASE("spherical harmonics and rotation convention") {
    // closed forms
    CHECK(std::abs(spherical_y(0, 0, 1.0, 2.0) - cplx(1.0 / std::sqrt(4.0 * M_PI))) < 1e-14);
    double th = 0.7, ph = 1.3;
    CHECK(std::abs(spherical_y(1, 0, th, ph) - cplx(std::sqrt(3.0 / (4 * M_PI)) * std::cos(th))) <
          1e-14);
    cplx y11 = -std::sqrt(3.0 / (8 * M_PI)) * std::sin(th) * std::exp(cplx(0, ph));
    CHECK(std::abs(spherical_y(1, 1, th, ph) - y11) < 1e-14);

    // Y_lm(R_A^{-1} x) = sum_{m'} D^l_{m'm}(A) Y_{lm'}(x): the coefficient
    // vector of a rotated expansion transforms by the wigner block.
    for (int l : {1, 2, 3}) {
        auto a = random_su2();
        auto d = wigner_block(2 * l, a);
        auto rinv = su2_to_so3(a).transpose();
        std::uniform_real_distribution<double> u(0.1, 3.0);
        for (int trial = 0; trial < 4; ++trial) {
            double theta = u(rng), phi = u(rng);
            Eigen::Vector3d x(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                              std::cos(theta));
            Eigen::Vector3d xr = rinv * x;
            double theta_r = std::acos(std::clamp(xr.z(), -1.0, 1.0));
            double phi_r = std::atan2(xr.y(), xr.x());
            for (int m = -l; m <= l; ++m) {
                cplx lhs = spherical_y(l, m, theta_r, phi_r);
                cplx rhs = 0.0;
                for (int mp = -l; mp <= l; ++mp)
                    rhs += d(l - mp, l - m) * spherical_y(l, mp, theta, phi);
                CHECK(std::abs(lhs - rhs) < 1e-12);
            }
        }
    }
}

TEST_CASE("gaunt coefficients") {
    // monopole of normalized spinor harmonics
    CHECK(gaunt(-1, 1, -1, 1, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gaunt(-1, -1, -1, -1, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    // parity violation: s_1/2 vs p_1/2 at k=0
    CHECK(gaunt(-1, 1, 1, 1, 0, 0) == 0.0);

    // upper and lower spinor-harmonic pairs couple identically
    for (int ka : {-1, 1, -2, 2})
        for (int kb : {-1, 1, -2, 2})
            for (int k = 0; k <= 3; ++k)
                for (int tma = -2 * std::abs(ka) + 1; tma <= 2 * std::abs(ka) - 1; tma += 2)
                    for (int tmb = -2 * std::abs(kb) + 1; tmb <= 2 * std::abs(kb) - 1; tmb += 2) {
                        int q = (tma - tmb) / 2;
                        double up = gaunt(ka, tma, kb, tmb, k, q);
                        double dn = gaunt(-ka, tma, -kb, tmb, k, q);
                        CHECK(up == doctest::Approx(dn).epsilon(1e-12));
                    }
}

TEST_CASE("gaunt against 2d angular quadrature") {
    // oracle: integrate conj(Omega_a) C^k_q Omega_b over the sphere with a
    // Gauss x uniform product rule
    const int nth = 40, nph = 64;
    std::vector<double> ct(nth), wt(nth);
    { // Gauss-Legendre on cos(theta)
        auto leg = [&](int n, double x) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1);
            return std::pair<double, double>(p1, dp);
        };
        for (int i = 0; i < nth; ++i) {
            double x = -std::cos(M_PI * (i + 0.75) / (nth + 0.5));
            for (int it = 0; it < 60; ++it) {
                auto [p, dp] = leg(nth, x);
                double dx = p / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            auto [p, dp] = leg(nth, x);
            (void)p;
            ct[i] = x;
            wt[i] = 2.0 / ((1 - x * x) * dp * dp);
        }
    }

    auto omega_at = [&](int kappa, int tm, int s, double th, double ph) -> cplx {
        auto sh = spinor_harmonic(kappa, tm);
        if (s == +1) return sh.coeff_up * spherical_y(sh.l, (tm - 1) / 2, th, ph);
        return sh.coeff_dn * spherical_y(sh.l, (tm + 1) / 2, th, ph);
    };

    struct Case {
        int ka, tma, kb, tmb, k;
    };
    for (auto c : {Case{-1, 1, -2, 1, 2}, Case{1, 1, 1, -1, 1}, Case{-2, 3, 2, 1, 2},
                   Case{2, 3, 2, 1, 1}, Case{-1, 1, 1, -1, 1}}) {
        int q = (c.tma - c.tmb) / 2;
        cplx acc = 0.0;
        for (int i = 0; i < nth; ++i) {
            double th = std::acos(ct[i]);
            for (int j = 0; j < nph; ++j) {
                double ph = 2.0 * M_PI * j / nph;
                cplx ck = std::sqrt(4.0 * M_PI / (2.0 * c.k + 1.0)) * spherical_y(c.k, q, th, ph);
                cplx val = 0.0;
                for (int s : {+1, -1})
                    val += std::conj(omega_at(c.ka, c.tma, s, th, ph)) * ck *
                           omega_at(c.kb, c.tmb, s, th, ph);
                acc += wt[i] * (2.0 * M_PI / nph) * val;
            }
        }
        double lib = gaunt(c.ka, c.tma, c.kb, c.tmb, c.k, q);
        CHECK(std::abs(acc - cplx(lib)) < 1e-10);
    }
}
