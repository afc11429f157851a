#include "dflab/angular.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

namespace dflab {

namespace {

using bigint = boost::multiprecision::cpp_int;

const bigint& factorial_big(int n) {
    static std::vector<bigint> table = [] {
        std::vector<bigint> t(201);
        t[0] = 1;
        for (int i = 1; i <= 200; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    if (n < 0 || n > 200) throw std::out_of_range("factorial_big");
    return table[n];
}

double big_ratio_to_double(const bigint& num, const bigint& den) {
    // exact rational -> double with one rounding
    boost::multiprecision::cpp_int q, r;
    divide_qr(num, den, q, r);
    // 80 bits of the fraction are plenty for a double
    bigint scaled = (r << 80) / den;
    return q.convert_to<double>() + std::ldexp(scaled.convert_to<double>(), -80);
}

long double factorial_ld(int n) {
    static std::vector<long double> table = [] {
        std::vector<long double> t(171);
        t[0] = 1.0L;
        for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    if (n < 0 || n > 170) throw std::out_of_range("factorial_ld");
    return table[n];
}

bool triangle_ok(int tj1, int tj2, int tj3) {
    return tj3 >= std::abs(tj1 - tj2) && tj3 <= tj1 + tj2 && (tj1 + tj2 + tj3) % 2 == 0;
}

} // namespace

double three_j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
    if (tm1 + tm2 + tm3 != 0) return 0.0;
    if (tj1 < 0 || tj2 < 0 || tj3 < 0) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
    if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return 0.0;
    if (!triangle_ok(tj1, tj2, tj3)) return 0.0;

    // integer combinations (all guaranteed integral here)
    const int a1 = (tj1 + tj2 - tj3) / 2;
    const int a2 = (tj1 - tj2 + tj3) / 2;
    const int a3 = (-tj1 + tj2 + tj3) / 2;
    const int p = (tj1 + tj2 + tj3) / 2 + 1;
    const int jm1 = (tj1 + tm1) / 2, jn1 = (tj1 - tm1) / 2;
    const int jm2 = (tj2 + tm2) / 2, jn2 = (tj2 - tm2) / 2;
    const int jm3 = (tj3 + tm3) / 2, jn3 = (tj3 - tm3) / 2;

    // Racah sum with exact rationals: S = sum_t (-1)^t / prod(factorials)
    const int tmin = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
    const int tmax = std::min({a1, jn1, jm2});
    if (tmin > tmax) return 0.0;

    bigint s_num = 0, s_den = 1;
    for (int t = tmin; t <= tmax; ++t) {
        bigint d = factorial_big(t) * factorial_big(a1 - t) * factorial_big(jn1 - t) *
                   factorial_big(jm2 - t) * factorial_big((tj3 - tj2 + tm1) / 2 + t) *
                   factorial_big((tj3 - tj1 - tm2) / 2 + t);
        // s += (-1)^t / d
        bigint term_num = (t % 2) ? bigint(-1) : bigint(1);
        s_num = s_num * d + term_num * s_den;
        s_den = s_den * d;
    }
    if (s_num == 0) return 0.0;

    // squared prefactor is rational: delta * prod (j±m)!
    bigint r_num = factorial_big(a1) * factorial_big(a2) * factorial_big(a3) * factorial_big(jm1) *
                   factorial_big(jn1) * factorial_big(jm2) * factorial_big(jn2) *
                   factorial_big(jm3) * factorial_big(jn3);
    bigint r_den = factorial_big(p);

    bigint sq_num = r_num * s_num * s_num;
    bigint sq_den = r_den * s_den * s_den;
    double value = std::sqrt(big_ratio_to_double(sq_num, sq_den));
    int sign = (s_num < 0) ? -1 : 1;
    if (((tj1 - tj2 - tm3) / 2) % 2) sign = -sign;
    return sign * value;
}

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj3, int tm3) {
    if (tm1 + tm2 != tm3) return 0.0;
    double w = three_j(tj1, tj2, tj3, tm1, tm2, -tm3);
    if (w == 0.0) return 0.0;
    int phase = ((tj1 - tj2 + tm3) / 2) % 2 ? -1 : 1;
    return phase * std::sqrt(tj3 + 1.0) * w;
}

double gaunt_y(int l1, int m1, int k, int q, int l2, int m2) {
    if (m1 != q + m2) return 0.0;
    if ((l1 + k + l2) % 2) return 0.0;
    double w0 = three_j(2 * l1, 2 * k, 2 * l2, 0, 0, 0);
    if (w0 == 0.0) return 0.0;
    double wm = three_j(2 * l1, 2 * k, 2 * l2, -2 * m1, 2 * q, 2 * m2);
    if (wm == 0.0) return 0.0;
    double val = std::sqrt((2.0 * l1 + 1.0) * (2.0 * l2 + 1.0)) * w0 * wm;
    return (m1 % 2) ? -val : val;
}

SpinorHarmonic spinor_harmonic(int kappa, int tm) {
    if (kappa == 0) throw std::invalid_argument("spinor_harmonic: kappa must be nonzero");
    Channel ch{kappa};
    SpinorHarmonic sh;
    sh.l = ch.l_large();
    sh.tm = tm;
    const int tj = ch.tj();
    sh.coeff_up = clebsch_gordan(2 * sh.l, tm - 1, 1, 1, tj, tm);
    sh.coeff_dn = clebsch_gordan(2 * sh.l, tm + 1, 1, -1, tj, tm);
    return sh;
}

double gaunt(int kappa_a, int tma, int kappa_b, int tmb, int k, int q) {
    if (2 * q != tma - tmb) return 0.0;
    const SpinorHarmonic a = spinor_harmonic(kappa_a, tma);
    const SpinorHarmonic b = spinor_harmonic(kappa_b, tmb);
    double s = 0.0;
    if (std::abs(tma - 1) <= 2 * a.l && std::abs(tmb - 1) <= 2 * b.l)
        s += a.coeff_up * b.coeff_up * gaunt_y(a.l, (tma - 1) / 2, k, q, b.l, (tmb - 1) / 2);
    if (std::abs(tma + 1) <= 2 * a.l && std::abs(tmb + 1) <= 2 * b.l)
        s += a.coeff_dn * b.coeff_dn * gaunt_y(a.l, (tma + 1) / 2, k, q, b.l, (tmb + 1) / 2);
    return s;
}

RotationSU2::RotationSU2(const Eigen::Matrix2cd& a) : m(a) {
    if ((m * m.adjoint() - Eigen::Matrix2cd::Identity()).norm() > 1e-12 ||
        std::abs(m.determinant() - 1.0) > 1e-12)
        throw std::invalid_argument("RotationSU2: matrix is not in SU(2)");
}

RotationSU2 RotationSU2::identity() { return RotationSU2(Eigen::Matrix2cd::Identity()); }

RotationSU2 RotationSU2::axis_angle(const Eigen::Vector3d& axis, double theta) {
    Eigen::Vector3d n = axis.normalized();
    const cplx i(0.0, 1.0);
    Eigen::Matrix2cd sn;
    sn << n.z(), cplx(n.x(), -n.y()), cplx(n.x(), n.y()), -n.z();
    Eigen::Matrix2cd a = std::cos(theta / 2) * Eigen::Matrix2cd::Identity() -
                         i * std::sin(theta / 2) * sn;
    return RotationSU2(a);
}

Eigen::Matrix3d su2_to_so3(const RotationSU2& a) {
    static const std::array<Eigen::Matrix2cd, 3> sigma = [] {
        std::array<Eigen::Matrix2cd, 3> s;
        const cplx i(0.0, 1.0);
        s[0] << 0, 1, 1, 0;
        s[1] << 0, -i, i, 0;
        s[2] << 1, 0, 0, -1;
        return s;
    }();
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = 0.5 * (sigma[i] * a.m * sigma[j] * a.m.adjoint()).trace().real();
    return r;
}

Eigen::MatrixXcd wigner_block(int tj, const RotationSU2& rot) {
    if (tj < 0) throw std::invalid_argument("wigner_block: tj must be >= 0");
    const int dim = tj + 1;
    Eigen::MatrixXcd d(dim, dim);
    const cplx a = rot.m(0, 0), b = rot.m(0, 1), c = rot.m(1, 0), dd = rot.m(1, 1);
    // action on monomials z1^{j+m} z2^{j-m} under z -> A^T z; for tj = 1 the
    // block is A itself. Index im = 0..tj labels m = j - im (decreasing m,
    // matching 2-spinor component order).
    for (int col = 0; col < dim; ++col) {
        const int jm = tj - col; // j+m
        const int jn = col;      // j-m
        std::vector<cplx> poly(tj + 1, cplx(0.0)); // coeff of z1^{tj-i} z2^{i}
        poly[0] = 1.0;
        auto mul_linear = [&](cplx u, cplx v, int times) {
            // multiply by (u z1 + v z2)^times
            for (int t = 0; t < times; ++t) {
                std::vector<cplx> next(tj + 1, cplx(0.0));
                for (int i = 0; i <= tj; ++i) {
                    if (poly[i] == cplx(0.0)) continue;
                    next[i] += u * poly[i];
                    if (i + 1 <= tj) next[i + 1] += v * poly[i];
                }
                poly = std::move(next);
            }
        };
        mul_linear(a, c, jm);
        mul_linear(b, dd, jn);
        const long double norm_col = std::sqrt(factorial_ld(jm) * factorial_ld(jn));
        for (int row = 0; row < dim; ++row) {
            // z2 exponent = j - m' = row
            const long double norm_row = std::sqrt(factorial_ld(tj - row) * factorial_ld(row));
            d(row, col) = poly[row] * static_cast<double>(norm_row / norm_col);
        }
    }
    return d;
}

cplx spherical_y(int l, int m, double theta, double phi) {
    const int am = std::abs(m);
    if (am > l) return 0.0;
    // normalized associated Legendre with Condon-Shortley phase
    const double x = std::cos(theta);
    const double sx = std::sin(theta);
    double pmm = 1.0;
    for (int k = 1; k <= am; ++k) pmm *= -(2.0 * k - 1.0) * sx;
    double p0 = pmm, p1 = x * (2.0 * am + 1.0) * pmm;
    double p = (l == am) ? p0 : p1;
    for (int ll = am + 2; ll <= l; ++ll) {
        double p2 = ((2.0 * ll - 1.0) * x * p1 - (ll + am - 1.0) * p0) / (ll - am);
        p0 = p1;
        p1 = p2;
        p = p2;
    }
    double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * std::exp(std::lgamma(l - am + 1.0) -
                                                                      std::lgamma(l + am + 1.0)));
    cplx val = norm * p * std::exp(cplx(0.0, am * phi));
    if (m < 0) {
        val = std::conj(val);
        if (am % 2) val = -val;
    }
    return val;
}

std::vector<RotationSU2> default_rotation_candidates() {
    return {RotationSU2::axis_angle({0, 1, 0}, M_PI / 4), RotationSU2::axis_angle({0, 1, 0}, M_PI / 2),
            RotationSU2::axis_angle({0, 0, 1}, M_PI / 2), RotationSU2::axis_angle({1, 0, 0}, M_PI / 2)};
}

} // namespace dflab
