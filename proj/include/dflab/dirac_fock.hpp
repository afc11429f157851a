#pragma once

#include "dflab/angular.hpp"
#include "dflab/coulomb.hpp"
#include "dflab/radial_dirac.hpp"

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace dflab {

/// One element of the truncated one-particle space: eigenstate of the linear
/// channel problem with magnetic label m (stored doubled). The linear
/// Hamiltonian is diagonal in this basis.
struct BasisElement {
    int kappa = 0;
    int n = 0;          // position within the channel's selected states
    int tm = 0;         // 2m, decreasing within a (kappa, n) block
    double lambda = 0;  // linear eigenvalue
    int radial_id = -1; // index into radial orbital storage
    bool negative = false;
};

/// Truncated one-particle space: the lowest n_pos positive and n_neg
/// negative eigenstates of H^c + V per channel, with full m multiplets.
/// Owns the radial solutions, the Slater-integral cache and the angular
/// coefficient tables.
class OrbitalBasis {
  public:
    OrbitalBasis(const RadialBasis& rbasis, const Potential& v, double c, int kmax, int n_pos,
                 int n_neg, double cluster_tol, int max_shells = 8);

    int size() const { return static_cast<int>(elements_.size()); }
    const BasisElement& element(int a) const { return elements_[a]; }
    int index_of(int kappa, int n, int tm) const;
    double c() const { return c_; }
    const RadialGrid& grid() const { return rbasis_.grid(); }
    const RadialBasis& radial_basis() const { return rbasis_; }
    const SpectrumTable& spectrum() const { return spectrum_; }
    const std::vector<ChannelSpectrum>& channels() const { return channels_; }
    int n_radial() const { return static_cast<int>(radials_.size()); }
    const RadialOrbital& radial(int rad_id) const { return *radials_[rad_id]; }

    Eigen::VectorXd lambdas() const;
    /// <a|V|b> over the truncated space
    const Eigen::MatrixXd& v_matrix() const { return vmat_; }

    /// rho_ab(r) = P_a P_b + Q_a Q_b by radial ids (cached)
    const std::vector<double>& pair_density(int rad_a, int rad_b) const;

    /// Slater integral over radial ids with the (1st,3rd)(2nd,4th) pairing;
    /// cache keys are canonical so symmetric requests are bit-identical.
    double slater(int rad_a, int rad_b, int rad_c, int rad_d, int k) const;

    /// <Omega_a | C^k_q | Omega_b> with q fixed by the m labels
    double angular_coeff(int a, int b, int k) const;
    /// same, keyed by quantum numbers (memoized; the exact 3j path is slow)
    double gaunt_cached(int kappa_a, int tma, int kappa_b, int tmb, int k) const;

    /// <ab|cd> two-electron integral, physicist pairing (a,c)(b,d); real in
    /// this basis
    double two_electron(int a, int b, int c, int d) const;

    /// matrix of the bullet action: block Wigner-D per (kappa, n)
    Eigen::MatrixXcd rotation_matrix(const RotationSU2& rot) const;

    /// binary cache of computed Slater integrals
    void save_slater_cache(const std::string& path, uint64_t config_hash) const;
    bool load_slater_cache(const std::string& path, uint64_t config_hash);

    /// free-Dirac matrix over the truncated space and its spectral pieces
    struct FreeDirac {
        Eigen::MatrixXd b_half, b_minus_half; // |H_free|^{1/2}, |H_free|^{-1/2}
        Eigen::MatrixXd lambda_plus;          // chi_{(0,inf)}(H_free)
    };
    const FreeDirac& free_dirac() const;

  private:
    RadialBasis rbasis_;
    double c_ = 0;
    std::vector<ChannelSpectrum> channels_;
    SpectrumTable spectrum_;
    std::vector<const RadialOrbital*> radials_;
    std::vector<BasisElement> elements_;
    std::map<std::tuple<int, int, int>, int> index_;
    Eigen::MatrixXd vmat_;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, int>, std::vector<double>> pair_cache_;
    mutable std::map<std::tuple<int, int, int, int, int>, double> slater_cache_;
    mutable std::map<std::tuple<int, int, int, int, int>, double> gaunt_cache_;
    mutable std::unique_ptr<FreeDirac> free_dirac_;
};

/// N orthonormal spin-orbitals over the truncated basis.
struct OccupiedSet {
    Eigen::MatrixXcd frame; // size x N
    std::string provenance;

    int n() const { return static_cast<int>(frame.cols()); }
    double gram_error() const {
        return (frame.adjoint() * frame -
                Eigen::MatrixXcd::Identity(frame.cols(), frame.cols()))
            .cwiseAbs()
            .maxCoeff();
    }
};

struct EnergyBreakdown {
    double one_body = 0;
    double direct_term = 0;
    double exchange_term = 0;
    double total = 0;
    double kappa = 0;
    double c = 0;
};

struct Multipliers {
    Eigen::VectorXd eps;
};

struct MeanFieldState {
    Eigen::MatrixXcd h;        // H_{kappa,W}
    Eigen::MatrixXcd omega;    // (h - h_lin)/kappa, zero at kappa = 0
    Eigen::VectorXd eigs;      // ascending
    Eigen::MatrixXcd vecs;     // eigenvectors as columns
    Eigen::MatrixXcd pos_basis; // columns spanning ran P^+
    double kappa = 0, c = 0;
    double epsilon_closeness = 0; // against the free-Dirac projector

    Eigen::MatrixXcd pplus() const { return pos_basis * pos_basis.adjoint(); }
    Eigen::MatrixXcd pminus() const {
        return Eigen::MatrixXcd::Identity(h.rows(), h.cols()) - pplus();
    }
};

struct ScfOptions {
    double tol = 1e-10;          // orbital residual tolerance
    int max_iter = 200;
    double damping = 0.3;        // mean-field mixing weight of the new iterate
    double level_shift = 0.5;    // absolute shift applied to virtuals
    bool check_aufbau = true;
};

struct ScfTraceRow {
    int iter;
    double energy;
    double residual;
};

struct ScfResult {
    OccupiedSet w;
    Multipliers eps;
    MeanFieldState mf;
    bool converged = false;
    bool aufbau_ok = true;
    int iterations = 0;
    std::vector<ScfTraceRow> trace;
    std::string trace_csv() const;
};

struct FiberMaxReport {
    bool critical = false;        // W solves the stationarity condition
    double gradient_norm = 0;
    bool negative_definite = false;
    double margin = 0;            // most positive eigenvalue of the linear block
    double kappa_term_bound = 0;  // sampled bound on the two-electron part
};

/// Dirac-Fock model over a truncated basis: energy, mean field, projectors,
/// the projected SCF and the self-consistent SCF.
class DiracFock {
  public:
    explicit DiracFock(std::shared_ptr<const OrbitalBasis> basis) : basis_(std::move(basis)) {}

    const OrbitalBasis& basis() const { return *basis_; }
    double c() const { return basis_->c(); }
    int dim() const { return basis_->size(); }

    /// direct and exchange matrices of the generalized density
    /// sum_r w_r u_r u_r^dagger
    struct JkMatrices {
        Eigen::MatrixXcd j, k;
    };
    JkMatrices build_jk(const Eigen::MatrixXcd& vectors, const Eigen::VectorXd& weights) const;

    /// J - K matrix of the generalized density sum_r w_r u_r u_r^dagger
    Eigen::MatrixXcd omega_matrix(const Eigen::MatrixXcd& vectors,
                                  const Eigen::VectorXd& weights) const;
    Eigen::MatrixXcd omega_matrix(const Eigen::MatrixXcd& hermitian_density) const;

    EnergyBreakdown df_energy(const OccupiedSet& w, double kappa) const;
    MeanFieldState mean_field(const OccupiedSet& w, double kappa) const;

    /// operator-norm distance of Definition-1 type between the span of
    /// p_basis and the free-Dirac positive projector
    double epsilon_closeness(const Eigen::MatrixXcd& p_basis) const;

    ScfResult projected_minimize(const Eigen::MatrixXcd& p_basis, int n, double kappa,
                                 const ScfOptions& opts,
                                 const std::optional<Eigen::MatrixXcd>& start = {}) const;

    ScfResult scf_selfconsistent(int n, double kappa, const ScfOptions& opts,
                                 const std::optional<Eigen::MatrixXcd>& start = {}) const;

    /// exact E(orthonormalized(phi + delta)) - E(phi), assembled from small
    /// products so that differences far below the total-energy roundoff stay
    /// meaningful
    double energy_difference(const OccupiedSet& phi, const Eigen::MatrixXcd& delta,
                             double kappa) const;

    /// second-variation check that W maximizes the energy along mixings of
    /// occupied orbitals with the negative spectrum of its own mean field
    FiberMaxReport fiber_max_check(const OccupiedSet& w, double kappa,
                                   const ScfOptions& opts = {}) const;

    /// bullet action on an occupied set
    OccupiedSet rotate_occupied(const OccupiedSet& w, const RotationSU2& rot) const;

  private:
    std::shared_ptr<const OrbitalBasis> basis_;
};

/// largest principal angle between the column spans of two orthonormal frames
double subspace_angle(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// orthonormalize columns (QR-based, deterministic)
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& frame);

} // namespace dflab
