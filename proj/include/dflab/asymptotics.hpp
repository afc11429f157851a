#pragma once

#include "dflab/dirac_fock.hpp"
#include "dflab/radial_dirac.hpp"
#include "dflab/sphfield.hpp"

#include <string>
#include <vector>

namespace dflab {

/// Nonrelativistic 2-spinor eigenstate with the spin-angular structure of
/// Omega_{kappa m}, kept as a coefficient-space expansion.
struct PauliOrbital {
    SpinorSH phi;
    double mu = 0;  // Schrodinger eigenvalue
    int l = 0;
    int kappa = 0, tm = 0;
    std::vector<double> u, du; // radial amplitude tables of the solver state
};

PauliOrbital make_pauli_orbital(const RadialGrid& grid, const RadialOrbital& schro, int kappa,
                                int tm);

/// Matrix average of the resolvent product along the imaginary axis,
/// evaluated both by adaptive quadrature and by the residue closed form.
struct ResolventAverage {
    Eigen::Matrix4cd quadrature;
    Eigen::Matrix4cd closed_form;
};
ResolventAverage resolvent_average(const Eigen::Vector3d& p, double c);

/// free-Dirac 4x4 structures (exposed for the expansion checks)
Eigen::Matrix4cd dirac_beta();
Eigen::Matrix4cd dirac_alpha_dot(const Eigen::Vector3d& p);

/// Comparison of the exact channel eigenstate with the nonrelativistic
/// 2-spinor paired through the kinetic-balance small component.
struct PairingReport {
    double c = 0;
    double error_norm = 0;     // || psi_exact - psi_paired ||
    double large_overlap = 0;  // <P, u>
    double small_rel_error = 0;
};
PairingReport pair_orbital(const RadialBasis& basis, const Potential& v, double c, int kappa,
                           int state_index);

/// f(A, phi): the commutator-like field of the two sigma-contracted
/// electrostatic convolutions
struct FField {
    SpinorSH f;
    double tail_norm = 0; // dropped expansion components
};
FField f_field(const PauliOrbital& phi, const RotationSU2& a);
/// same on a general 2-spinor expansion
FField f_field_expansion(const SpinorSH& phi, const RotationSU2& a);

/// I(r) = surface integral of <(x.sigma) phi, f> over the sphere of radius r,
/// tabulated on the grid radii
Eigen::VectorXcd surface_integral_table(const PauliOrbital& phi, const SpinorSH& f);

/// \int |phi|^2 - | \int <A.phi, phi> |
double cauchy_schwarz_margin(const PauliOrbital& phi, const RotationSU2& a);

struct PropertyPCertificate {
    bool verdict = false;
    int winner = -1;          // index into the candidate list
    double sup_r_i = 0;       // sup over the tail window of |r I(r)|
    double noise_floor = 0;
    double margin = 0;        // Cauchy-Schwarz margin of the winner
    double delta_fit = 0;     // fitted lower constant of the tail law
    double f_norm = 0;
    double window_lo = 0, window_hi = 0;
    std::string curves_csv;   // r, surface density, |r I(r)| for the winner
};

PropertyPCertificate property_p_certificate(const PauliOrbital& phi,
                                            const std::vector<RotationSU2>& candidates);

/// 2-spinor expansion of the large components of a truncated-basis vector
/// (the nonrelativistic reduction used by the cross-model check)
SpinorSH large_component_field(const OrbitalBasis& basis, const Eigen::VectorXcd& coeffs);

} // namespace dflab
