#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace dflab {

using cplx = std::complex<double>;

// Angular momentum arguments are passed as twice their value (tj = 2j,
// tm = 2m) so half-integers stay exact.

/// Wigner 3j symbol, evaluated from the Racah sum with exact integer
/// arithmetic and a single rounding at the end.
double three_j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);

/// Clebsch-Gordan <j1 m1 j2 m2 | j3 m3>.
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj3, int tm3);

/// <Y_{l1 m1} | C^k_q | Y_{l2 m2}> with C^k_q the Racah-normalized harmonic.
double gaunt_y(int l1, int m1, int k, int q, int l2, int m2);

/// Matrix element <Omega_{ka ma} | C^k_q | Omega_{kb mb}> between spinor
/// spherical harmonics; ma, mb doubled. Zero unless q = ma - mb and the
/// triangle/parity rules hold.
double gaunt(int kappa_a, int tma, int kappa_b, int tmb, int k, int q);

/// Element of SU(2); construction validates unitarity and unit determinant.
struct RotationSU2 {
    Eigen::Matrix2cd m;

    explicit RotationSU2(const Eigen::Matrix2cd& a);
    static RotationSU2 identity();
    /// exp(-i theta/2 axis.sigma), axis normalized internally
    static RotationSU2 axis_angle(const Eigen::Vector3d& axis, double theta);

    RotationSU2 operator*(const RotationSU2& other) const { return RotationSU2(m * other.m); }
    RotationSU2 inverse() const { return RotationSU2(m.adjoint()); }
};

/// Covering map: the unique R with (R x).sigma = A (x.sigma) A^{-1}.
Eigen::Matrix3d su2_to_so3(const RotationSU2& a);

/// Spin-(tj/2) representation matrix; unitary, a homomorphism, and equal to
/// A itself for tj = 1. Index i = 0..tj labels m = j - i (decreasing m, the
/// 2-spinor component order).
Eigen::MatrixXcd wigner_block(int tj, const RotationSU2& a);

/// Angular channel data derived from the relativistic quantum number.
struct Channel {
    int kappa = -1;
    int tj() const { return 2 * std::abs(kappa) - 1; } // 2j
    int degeneracy() const { return 2 * std::abs(kappa); }
    int l_large() const { return kappa > 0 ? kappa : -kappa - 1; }
    int l_small() const { return kappa > 0 ? kappa - 1 : -kappa; }
};

/// Expansion of Omega_{kappa m} over (Y_{l, m - s} chi_s), s = +-1/2.
struct SpinorHarmonic {
    int l;
    int tm;          // 2m
    double coeff_up; // on Y_{l,(tm-1)/2} chi_+
    double coeff_dn; // on Y_{l,(tm+1)/2} chi_-
};
SpinorHarmonic spinor_harmonic(int kappa, int tm);

/// Complex spherical harmonic with Condon-Shortley phase (used by test
/// oracles and convention checks; production code works on coefficients).
cplx spherical_y(int l, int m, double theta, double phi);

/// Rotation candidates used for symmetry witnesses: y-rotations by pi/4 and
/// pi/2, and z/x rotations by pi/2.
std::vector<RotationSU2> default_rotation_candidates();

} // namespace dflab
