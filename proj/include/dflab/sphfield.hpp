#pragma once

#include "dflab/angular.hpp"
#include "dflab/coulomb.hpp"
#include "dflab/grid.hpp"

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace dflab {

/// Scalar field on R^3 as an expansion f(x) = sum_lm f_lm(r) Y_lm(omega)
/// over orthonormal spherical harmonics, radial tables on the shared grid.
/// All angular operations are coefficient-space; pointwise evaluation exists
/// for oracles and diagnostics only.
class ScalarSH {
  public:
    ScalarSH() = default;
    ScalarSH(const RadialGrid* grid, int lmax);

    int lmax() const { return lmax_; }
    const RadialGrid& grid() const { return *grid_; }

    bool has(int l, int m) const;
    Eigen::VectorXcd& at(int l, int m);
    const Eigen::VectorXcd* find(int l, int m) const;

    /// list of active (l, m)
    std::vector<std::pair<int, int>> components() const;

    /// pointwise value at grid radius index g and direction (theta, phi)
    cplx eval_point(int g, double theta, double phi) const;

    /// \int f d^3x
    cplx integral() const;
    /// L^2(R^3) norm
    double norm() const;

    ScalarSH conjugate() const;
    ScalarSH& operator+=(const ScalarSH& other);
    ScalarSH& operator*=(double s);

  private:
    const RadialGrid* grid_ = nullptr;
    int lmax_ = -1;
    std::vector<Eigen::VectorXcd> data_; // (lmax+1)^2 slots, empty = zero
};

/// 2-spinor field; component 0 is spin up.
class SpinorSH {
  public:
    SpinorSH() = default;
    SpinorSH(const RadialGrid* grid, int lmax);

    ScalarSH& spin(int s) { return comp_[s]; }
    const ScalarSH& spin(int s) const { return comp_[s]; }
    int lmax() const { return comp_[0].lmax(); }
    const RadialGrid& grid() const { return comp_[0].grid(); }

    /// the bullet action (A phi)(x) = A phi(R_A^{-1} x)
    SpinorSH rotate(const RotationSU2& a) const;

    Eigen::Vector2cd eval_point(int g, double theta, double phi) const;
    double norm() const;
    /// <a, b> over L^2(R^3, C^2)
    static cplx dot(const SpinorSH& a, const SpinorSH& b);

    SpinorSH& operator+=(const SpinorSH& other);
    SpinorSH& operator-=(const SpinorSH& other);
    SpinorSH& operator*=(cplx s);

  private:
    std::array<ScalarSH, 2> comp_;
};

/// Vector field in spherical components nu = +1, 0, -1 (slots 0, 1, 2).
struct VectorSH {
    std::array<ScalarSH, 3> comp;
    ScalarSH& nu(int v) { return comp[1 - v]; }
    const ScalarSH& nu(int v) const { return comp[1 - v]; }
    /// Cartesian evaluation for diagnostics
    Eigen::Vector3cd eval_point_cartesian(int g, double theta, double phi) const;
};

/// coefficient of Y_{L,m1+m2} in the product Y_{l1 m1} Y_{l2 m2}
double y_product_coeff(int l1, int m1, int l2, int m2, int L);

/// pointwise C^2 inner density <a, b>(x) = sum_s conj(a_s) b_s, truncated to
/// lmax_out; if tail_norm is given it accumulates the L^2 norm of dropped
/// components.
ScalarSH density_product(const SpinorSH& a, const SpinorSH& b, int lmax_out,
                         double* tail_norm = nullptr);

/// pointwise product (f phi) of a scalar and a spinor field
SpinorSH scalar_times_spinor(const ScalarSH& f, const SpinorSH& phi, int lmax_out,
                             double* tail_norm = nullptr);

/// (w . sigma) phi with w in spherical components
SpinorSH sigma_dot_vector(const VectorSH& w, const SpinorSH& phi, int lmax_out,
                          double* tail_norm = nullptr);

/// (xhat . sigma) phi (exact: raises lmax by one)
SpinorSH sigma_dot_xhat(const SpinorSH& phi);

/// u = density * 1/|x| with exact radial derivative tables
struct PotentialSH {
    ScalarSH u;
    ScalarSH du;
};
PotentialSH hartree_potential(const ScalarSH& density);

/// grad applied to an expansion with known radial derivatives
VectorSH gradient_field(const PotentialSH& pot);

/// density * x/|x|^3 = -grad(density * 1/|x|), as a spherical-component field
VectorSH field_convolution(const ScalarSH& density);

/// sum_{l m s} conj(a_lms(r)) b_lms(r): the angular integral of <a,b>_{C^2}
/// over the sphere of each grid radius
Eigen::VectorXcd surface_dot(const SpinorSH& a, const SpinorSH& b);

} // namespace dflab
