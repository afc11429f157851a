#pragma once

#include "dflab/dirac_fock.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dflab {

/// Occupation split against the linear shell structure.
struct ShellSplit {
    int n_electrons = 0;
    int filled = 0;    // I: number of completely filled shells
    int open = 0;      // k: electrons in the (I+1)-th shell
    int shell_dim = 0; // d = N_{I+1} (0 when closed)
    bool closed() const { return open == 0; }
};

ShellSplit classify_shells(int n_electrons, const SpectrumTable& spectrum);

struct GameOptions {
    ScfOptions scf;
    int n_starts = 5;
    unsigned seed = 1;
    int max_game_iter = 12;
    double fixedpoint_angle = 1e-8;
    double perturbation = 1e-3;
};

struct LevelEResult {
    double energy = 0;
    ScfResult minimizer;
    std::vector<double> start_energies; // converged energies of every start
};

/// min over DF solutions from multi-start self-consistent runs
LevelEResult level_E(const DiracFock& df, int n, double kappa, const GameOptions& opts);

struct GameIteration {
    int iter;
    double inf_value;
    double subspace_angle; // between successive trial subspaces
};

struct GameReport {
    double e_level = 0;
    double big_e_level = 0;
    bool fixedpoint = false;
    std::string status;          // fixed-point | cycle | inconclusive
    std::string classification;  // closed-shell | open-shell
    double gap = 0;              // E - inf inside the minimizer's own projector
    double projector_angle = 0;  // best projector vs P^+ of the E-minimizer
    std::vector<GameIteration> trace;
    std::string best_candidate;  // which search branch produced e_level

    std::string to_kv() const;
    std::string trace_csv() const;
};

/// the sup-inf game over self-consistent trial projectors
GameReport level_e(const DiracFock& df, int n, double kappa, const GameOptions& opts,
                   const LevelEResult& lev_e_big);

struct GapCertificate {
    double gap = 0;           // certified lower bound on E - inf
    double gap_scf = 0;       // via the projected SCF route
    double gap_rotation = 0;  // via second-order drops of rotated images
    double noise_floor = 0;
    double best_angle = 0;    // rotation angle of the winning candidate
    std::string best_axis;
};

/// E(W*) - inf of the energy inside ran P^+_{kappa,W*}. The rotation route
/// evaluates candidate drops by exact second-order algebra around rotated
/// images, which stays meaningful far below the total-energy roundoff.
GapCertificate gap_certificate(const DiracFock& df, const ScfResult& wstar, double kappa,
                               const GameOptions& opts);

/// basis-element indices of the filled shells and of the open shell
struct ShellBasis {
    std::vector<int> filled;
    std::vector<int> open;
};
ShellBasis shell_basis(const OrbitalBasis& basis, const ShellSplit& split);

/// energy of the determinant (filled shells) + (frame z in the open shell)
double reduced_openshell_energy(const DiracFock& df, const ShellSplit& split,
                                const Eigen::MatrixXcd& z, double kappa);

struct S0MinimizeResult {
    Eigen::MatrixXcd z;
    double energy = 0;
    bool exhaustive_checked = false;
    double exhaustive_min = 0;
    int iterations = 0;
};

/// projected-gradient minimization of the reduced energy over the
/// Grassmannian of open-shell frames, with the mandatory exhaustive
/// cross-check in the d=2, k=1 case
S0MinimizeResult minimize_on_S0(const DiracFock& df, const ShellSplit& split, double kappa,
                                const GameOptions& opts);

struct LsRefineResult {
    OccupiedSet w;
    int newton_iterations = 0;
    double residual = 0;
    double correction_norm = 0; // ||h(z,kappa) - z||
};

/// Newton solution of the fiber stationarity condition: the unique point of
/// the reduced manifold over z
LsRefineResult lyapunov_schmidt_refine(const DiracFock& df, const ShellSplit& split,
                                       const Eigen::MatrixXcd& z, double kappa,
                                       double newton_tol = 1e-10, int max_iter = 50);

struct KatoComparison {
    double exact_norm = 0;      // ||P^-_{kappa,A.W} psi||
    double predicted_norm = 0;  // ||kappa T||
    double difference_norm = 0; // ||exact - kappa T||
};

/// exact projector rotation response against the first-order perturbation
/// sum over the linear spectrum
KatoComparison projector_rotation_firstorder(const DiracFock& df, const ScfResult& wstar,
                                             const RotationSU2& a, double kappa);

} // namespace dflab
