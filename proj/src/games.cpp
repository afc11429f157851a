#include "dflab/games.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dflab {

ShellSplit classify_shells(int n_electrons, const SpectrumTable& spectrum) {
    if (n_electrons < 0) throw std::invalid_argument("classify_shells: negative N");
    ShellSplit out;
    out.n_electrons = n_electrons;
    int remaining = n_electrons;
    for (const auto& sh : spectrum.shells) {
        if (remaining == 0) break;
        if (remaining >= sh.dim) {
            remaining -= sh.dim;
            ++out.filled;
        } else {
            out.open = remaining;
            out.shell_dim = sh.dim;
            remaining = 0;
        }
    }
    if (remaining > 0)
        throw std::invalid_argument("classify_shells: N exceeds the available shell capacity");
    if (out.open == 0) out.shell_dim = 0;
    return out;
}

namespace {

// perturbations live on the discrete gap states; mixing with the box
// continuum is physically irrelevant for the start and keeps the active
// channel set (and the mean-field build cost) small
Eigen::MatrixXcd perturbed_start(const DiracFock& df, const Eigen::MatrixXcd& base, double eta,
                                 std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double c2 = df.c() * df.c();
    Eigen::MatrixXcd noise = Eigen::MatrixXcd::Zero(base.rows(), base.cols());
    for (int i = 0; i < base.rows(); ++i) {
        const double lam = df.basis().element(i).lambda;
        if (lam <= 0.0 || lam >= c2) continue;
        for (int j = 0; j < base.cols(); ++j) noise(i, j) = cplx(g(rng), g(rng));
    }
    return orthonormalize(base + eta * noise);
}

} // namespace

LevelEResult level_E(const DiracFock& df, int n, double kappa, const GameOptions& opts) {
    LevelEResult out;
    std::mt19937_64 rng(opts.seed);
    std::optional<ScfResult> best;

    // default aufbau start plus perturbed starts
    for (int s = 0; s < std::max(1, opts.n_starts); ++s) {
        std::optional<Eigen::MatrixXcd> start;
        if (s > 0) {
            if (!best) break; // no reference to perturb
            start = perturbed_start(df, best->w.frame, opts.perturbation, rng);
        }
        ScfResult res = df.scf_selfconsistent(n, kappa, opts.scf, start);
        if (!res.converged) continue;
        const double e = df.df_energy(res.w, kappa).total;
        out.start_energies.push_back(e);
        if (!best || e < out.energy) {
            out.energy = e;
            best = std::move(res);
        }
    }
    if (!best) throw std::runtime_error("level_E: no start converged");
    out.minimizer = std::move(*best);
    return out;
}

GameReport level_e(const DiracFock& df, int n, double kappa, const GameOptions& opts,
                   const LevelEResult& lev) {
    GameReport rep;
    rep.big_e_level = lev.energy;
    std::mt19937_64 rng(opts.seed + 17);

    // candidate evaluation: inf of the energy inside a trial projector
    auto inf_inside = [&](const Eigen::MatrixXcd& pos_basis,
                          const Eigen::MatrixXcd& warm) -> std::pair<double, ScfResult> {
        ScfResult best;
        double bestE = std::numeric_limits<double>::infinity();
        for (int s = 0; s < 2; ++s) {
            std::optional<Eigen::MatrixXcd> start;
            if (s == 1) start = warm;
            ScfResult res = df.projected_minimize(pos_basis, n, kappa, opts.scf, start);
            if (!res.converged) continue;
            const double e = df.df_energy(res.w, kappa).total;
            if (e < bestE) {
                bestE = e;
                best = std::move(res);
            }
        }
        return {bestE, best};
    };

    // natural fixed-point iteration started from the E-minimizer
    Eigen::MatrixXcd wt = lev.minimizer.w.frame;
    std::vector<Eigen::MatrixXcd> history;
    rep.e_level = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd best_projector;
    rep.status = "inconclusive";

    for (int it = 1; it <= opts.max_game_iter; ++it) {
        auto mf = df.mean_field(OccupiedSet{wt, "game"}, kappa);
        auto [inf_val, inf_res] = inf_inside(mf.pos_basis, wt);
        if (!std::isfinite(inf_val)) break;
        const double ang = subspace_angle(inf_res.w.frame, wt);
        rep.trace.push_back({it, inf_val, ang});
        if (inf_val > rep.e_level) {
            rep.e_level = inf_val;
            best_projector = mf.pos_basis;
            rep.best_candidate = "fixed-point-iteration";
        }
        if (ang <= opts.fixedpoint_angle) {
            rep.fixedpoint = true;
            rep.status = "fixed-point";
            break;
        }
        // cycle detection over a window of previous iterates
        bool cycled = false;
        for (const auto& prev : history)
            if (subspace_angle(inf_res.w.frame, prev) <= opts.fixedpoint_angle) cycled = true;
        history.push_back(wt);
        if (static_cast<int>(history.size()) > 8) history.erase(history.begin());
        wt = inf_res.w.frame;
        if (cycled) {
            rep.status = "cycle";
            break;
        }
    }

    // projectors from the other converged solutions and from rotated copies
    std::vector<Eigen::MatrixXcd> extra;
    extra.push_back(lev.minimizer.w.frame);
    for (const auto& a : default_rotation_candidates())
        extra.push_back(df.basis().rotation_matrix(a) * lev.minimizer.w.frame);
    extra.push_back(perturbed_start(df, lev.minimizer.w.frame, opts.perturbation, rng));
    for (const auto& frame : extra) {
        auto mf = df.mean_field(OccupiedSet{frame, "cand"}, kappa);
        auto [inf_val, inf_res] = inf_inside(mf.pos_basis, frame);
        (void)inf_res;
        if (std::isfinite(inf_val) && inf_val > rep.e_level) {
            rep.e_level = inf_val;
            best_projector = mf.pos_basis;
            rep.best_candidate = "solution-or-rotation";
        }
    }

    if (best_projector.size() > 0) {
        auto mf_min = df.mean_field(lev.minimizer.w, kappa);
        rep.projector_angle = subspace_angle(best_projector, mf_min.pos_basis);
    }
    return rep;
}

GapCertificate gap_certificate(const DiracFock& df, const ScfResult& wstar, double kappa,
                               const GameOptions& opts) {
    GapCertificate cert;
    const double e_star = df.df_energy(wstar.w, kappa).total;
    const auto& mf = wstar.mf;
    const Eigen::MatrixXcd& pos = mf.pos_basis;

    // route (i): projected SCF from several starts
    std::mt19937_64 rng(opts.seed + 99);
    double best_inf = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opts.n_starts); ++s) {
        std::optional<Eigen::MatrixXcd> start;
        if (s == 1) start = wstar.w.frame;
        if (s > 1) start = perturbed_start(df, wstar.w.frame, opts.perturbation, rng);
        ScfResult res = df.projected_minimize(pos, wstar.w.n(), kappa, opts.scf, start);
        if (!res.converged) continue;
        best_inf = std::min(best_inf, df.df_energy(res.w, kappa).total);
    }
    cert.gap_scf = std::isfinite(best_inf) ? e_star - best_inf : 0.0;

    // route (ii): exact second-order drop of the projected rotated images;
    // E(A.W*) = E(W*) holds exactly in the discrete model, so the drop is
    // evaluated entirely from small corrections
    auto drop_for = [&](const RotationSU2& a) -> double {
        Eigen::MatrixXcd phi = df.basis().rotation_matrix(a) * wstar.w.frame;
        // eta = P^- phi
        Eigen::MatrixXcd eta = phi - pos * (pos.adjoint() * phi);
        Eigen::MatrixXcd s = eta.adjoint() * eta;
        // (I - S)^{-1/2} - I = S/2 + 3 S^2/8 + ... (S is tiny)
        Eigen::MatrixXcd m_minus_i = 0.5 * s + 0.375 * s * s;
        Eigen::MatrixXcd delta = -eta * (Eigen::MatrixXcd::Identity(s.rows(), s.cols()) + m_minus_i) +
                                 phi * m_minus_i;
        const double de = df.energy_difference(OccupiedSet{phi, "rot"}, delta, kappa);
        return -de;
    };

    // noise floor: the identity rotation would drop exactly zero for an
    // exact critical point; what remains measures the convergence noise
    cert.noise_floor = std::abs(drop_for(RotationSU2::identity()));

    struct Cand {
        Eigen::Vector3d axis;
        const char* name;
    };
    const std::vector<Cand> axes = {{{0, 1, 0}, "y"}, {{1, 0, 0}, "x"}, {{0, 0, 1}, "z"}};
    cert.gap_rotation = 0.0;
    for (const auto& ax : axes) {
        for (int i = 1; i <= 8; ++i) {
            const double theta = M_PI * i / 8.0;
            const double d = drop_for(RotationSU2::axis_angle(ax.axis, theta));
            if (d > cert.gap_rotation) {
                cert.gap_rotation = d;
                cert.best_angle = theta;
                cert.best_axis = ax.name;
            }
        }
    }

    cert.gap = std::max({cert.gap_scf, cert.gap_rotation, 0.0});
    return cert;
}

ShellBasis shell_basis(const OrbitalBasis& basis, const ShellSplit& split) {
    ShellBasis out;
    const auto& spectrum = basis.spectrum();
    if (split.filled + (split.closed() ? 0 : 1) > static_cast<int>(spectrum.shells.size()))
        throw std::invalid_argument("shell_basis: spectrum has too few shells");
    auto shell_elements = [&](const Shell& sh) {
        std::vector<int> idx;
        for (auto [ci, oi] : sh.members) {
            const auto& chs = basis.channels()[ci];
            // find the basis (kappa, n) for this gap orbital
            auto gap = chs.gap();
            const RadialOrbital* orb = gap[oi];
            // locate the radial id by scanning basis elements
            for (int a = 0; a < basis.size(); ++a) {
                const auto& el = basis.element(a);
                if (el.kappa == chs.channel.kappa && &basis.radial(el.radial_id) == orb)
                    idx.push_back(a);
            }
        }
        std::sort(idx.begin(), idx.end());
        return idx;
    };
    for (int i = 0; i < split.filled; ++i) {
        auto idx = shell_elements(spectrum.shells[i]);
        out.filled.insert(out.filled.end(), idx.begin(), idx.end());
    }
    if (!split.closed()) out.open = shell_elements(spectrum.shells[split.filled]);
    return out;
}

namespace {

Eigen::MatrixXcd embed_openshell(const DiracFock& df, const ShellBasis& sb,
                                 const Eigen::MatrixXcd& z) {
    const int nb = df.dim();
    const int nfill = static_cast<int>(sb.filled.size());
    const int k = static_cast<int>(z.cols());
    Eigen::MatrixXcd frame = Eigen::MatrixXcd::Zero(nb, nfill + k);
    for (int i = 0; i < nfill; ++i) frame(sb.filled[i], i) = 1.0;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < static_cast<int>(sb.open.size()); ++i)
            frame(sb.open[i], nfill + j) = z(i, j);
    return frame;
}

} // namespace

double reduced_openshell_energy(const DiracFock& df, const ShellSplit& split,
                                const Eigen::MatrixXcd& z, double kappa) {
    auto sb = shell_basis(df.basis(), split);
    if (z.rows() != static_cast<int>(sb.open.size()))
        throw std::invalid_argument("reduced_openshell_energy: frame dimension mismatch");
    OccupiedSet w{embed_openshell(df, sb, z), "reduced"};
    return df.df_energy(w, kappa).total;
}

S0MinimizeResult minimize_on_S0(const DiracFock& df, const ShellSplit& split, double kappa,
                                const GameOptions& opts) {
    if (split.closed()) throw std::invalid_argument("minimize_on_S0: configuration is closed");
    auto sb = shell_basis(df.basis(), split);
    const int d = static_cast<int>(sb.open.size());
    const int k = split.open;
    std::mt19937_64 rng(opts.seed + 3);

    auto energy_of = [&](const Eigen::MatrixXcd& z) {
        return reduced_openshell_energy(df, split, z, kappa);
    };
    // riemannian gradient from the mean-field block on the open shell
    auto gradient_of = [&](const Eigen::MatrixXcd& z) {
        OccupiedSet w{embed_openshell(df, sb, z), "grad"};
        auto omega = df.omega_matrix(w.frame, Eigen::VectorXd::Ones(w.n()));
        Eigen::MatrixXcd f = Eigen::MatrixXcd(df.basis().lambdas().asDiagonal()) + kappa * omega;
        Eigen::MatrixXcd fblock(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) fblock(i, j) = f(sb.open[i], sb.open[j]);
        Eigen::MatrixXcd g = fblock * z;
        return (g - z * (z.adjoint() * g)).eval();
    };

    S0MinimizeResult out;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opts.n_starts); ++s) {
        Eigen::MatrixXcd z;
        if (s == 0) {
            z = Eigen::MatrixXcd::Zero(d, k);
            for (int j = 0; j < k; ++j) z(j, j) = 1.0;
        } else {
            std::normal_distribution<double> g(0.0, 1.0);
            Eigen::MatrixXcd r(d, k);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < k; ++j) r(i, j) = cplx(g(rng), g(rng));
            z = orthonormalize(r);
        }
        double e = energy_of(z);
        double step = 0.1;
        int it = 0;
        for (; it < 200; ++it) {
            Eigen::MatrixXcd grad = gradient_of(z);
            const double gnorm = grad.norm();
            if (gnorm < 1e-11) break;
            // armijo backtracking on the retracted step
            bool moved = false;
            for (int bt = 0; bt < 25; ++bt) {
                Eigen::MatrixXcd ztrial = orthonormalize(z - step * grad);
                const double etrial = energy_of(ztrial);
                if (etrial < e - 1e-4 * step * gnorm * gnorm) {
                    z = ztrial;
                    e = etrial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
            step = std::min(0.1, step * 1.5);
        }
        if (e < best) {
            best = e;
            out.z = z;
            out.energy = e;
            out.iterations = it;
        }
    }

    // mandatory exhaustive cross-check for the d=2, k=1 case: a 720-point
    // great-circle grid through the frame sphere
    if (d == 2 && k == 1) {
        out.exhaustive_checked = true;
        out.exhaustive_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 360; ++i) {
            const double th = M_PI * i / 360.0;
            for (double ph : {0.0, M_PI / 2}) {
                Eigen::MatrixXcd z(2, 1);
                z(0, 0) = std::cos(th / 2);
                z(1, 0) = std::exp(cplx(0, ph)) * std::sin(th / 2);
                out.exhaustive_min = std::min(out.exhaustive_min, energy_of(z));
            }
        }
    }
    return out;
}

LsRefineResult lyapunov_schmidt_refine(const DiracFock& df, const ShellSplit& split,
                                       const Eigen::MatrixXcd& z, double kappa, double newton_tol,
                                       int max_iter) {
    auto sb = shell_basis(df.basis(), split);
    const int nb = df.dim();
    const int n = static_cast<int>(sb.filled.size()) + static_cast<int>(z.cols());

    Eigen::MatrixXcd psi0 = embed_openshell(df, sb, z);
    // complement of the first I+1 shells
    std::vector<char> in_shells(nb, 0);
    for (int a : sb.filled) in_shells[a] = 1;
    for (int a : sb.open) in_shells[a] = 1;
    // the open-shell block counts entirely, occupied or not
    std::vector<int> comp;
    for (int a = 0; a < nb; ++a)
        if (!in_shells[a]) comp.push_back(a);
    const int nc = static_cast<int>(comp.size());

    // linear eigenvalues of the reference columns
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) {
        // each reference column is supported on one shell
        double lam = 0;
        for (int a = 0; a < nb; ++a)
            if (std::abs(psi0(a, i)) > 0) {
                lam = df.basis().element(a).lambda;
                break;
            }
        mu(i) = lam;
    }

    const Eigen::VectorXd lambdas = df.basis().lambdas();
    Eigen::MatrixXcd chi = Eigen::MatrixXcd::Zero(nc, n);

    LsRefineResult out;
    for (int it = 1; it <= max_iter; ++it) {
        // w = (psi0 + chi)(I + chi^d chi)^{-1/2}
        Eigen::MatrixXcd full_chi = Eigen::MatrixXcd::Zero(nb, n);
        for (int i = 0; i < nc; ++i) full_chi.row(comp[i]) = chi.row(i);
        Eigen::MatrixXcd gram = Eigen::MatrixXcd::Identity(n, n) + full_chi.adjoint() * full_chi;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(gram);
        Eigen::MatrixXcd ginv_half = ges.operatorInverseSqrt();
        Eigen::MatrixXcd w = (psi0 + full_chi) * ginv_half;

        auto omega = (kappa != 0.0) ? df.omega_matrix(w, Eigen::VectorXd::Ones(n))
                                    : Eigen::MatrixXcd::Zero(nb, nb);
        Eigen::MatrixXcd f = Eigen::MatrixXcd(lambdas.asDiagonal()) + kappa * omega;
        // residual: complement block of F w - w (w^d F w)
        Eigen::MatrixXcd r_full = f * w - w * (w.adjoint() * f * w);
        Eigen::MatrixXcd r(nc, n);
        for (int i = 0; i < nc; ++i) r.row(i) = r_full.row(comp[i]);
        out.residual = r.norm();
        out.newton_iterations = it - 1;
        if (out.residual <= newton_tol) break;
        if (it == max_iter)
            throw std::runtime_error("lyapunov_schmidt_refine: newton iteration diverged");

        // chord step with the block-diagonal shifted linear operator
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < n; ++j) chi(i, j) -= r(i, j) / (lambdas(comp[i]) - mu(j));
    }

    Eigen::MatrixXcd full_chi = Eigen::MatrixXcd::Zero(nb, n);
    for (int i = 0; i < nc; ++i) full_chi.row(comp[i]) = chi.row(i);
    out.correction_norm = full_chi.norm();
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Identity(n, n) + full_chi.adjoint() * full_chi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ges(gram);
    out.w = OccupiedSet{(psi0 + full_chi) * ges.operatorInverseSqrt(), "ls-refine"};
    return out;
}

KatoComparison projector_rotation_firstorder(const DiracFock& df, const ScfResult& wstar,
                                             const RotationSU2& a, double kappa) {
    KatoComparison out;
    const auto& bas = df.basis();
    const int nb = bas.size();

    // highest occupied canonical orbital
    const int n = wstar.w.n();
    Eigen::VectorXcd psi = wstar.w.frame.col(n - 1);

    // exact projector applied to psi
    auto mf_rot = df.mean_field(df.rotate_occupied(wstar.w, a), kappa);
    Eigen::VectorXcd exact = psi - mf_rot.pos_basis * (mf_rot.pos_basis.adjoint() * psi);
    out.exact_norm = exact.norm();

    // first-order sum over the linear spectrum with the kappa -> 0 limit
    // objects: psi0 = projection of psi onto its dominant linear shell,
    // single-orbital omegas (the filled-core contribution cancels under
    // rotation)
    const auto& spectrum = bas.spectrum();
    int best_shell = 0;
    double best_weight = -1.0;
    std::vector<std::vector<int>> shell_idx(spectrum.shells.size());
    for (int a = 0; a < nb; ++a) {
        const auto& el = bas.element(a);
        for (size_t si = 0; si < spectrum.shells.size(); ++si)
            if (std::abs(el.lambda - spectrum.shells[si].lambda) <
                1e-6 * std::abs(spectrum.shells[si].lambda))
                shell_idx[si].push_back(a);
    }
    for (size_t si = 0; si < spectrum.shells.size(); ++si) {
        double wgt = 0;
        for (int a : shell_idx[si]) wgt += std::norm(psi(a));
        if (wgt > best_weight) {
            best_weight = wgt;
            best_shell = static_cast<int>(si);
        }
    }
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(nb);
    for (int a : shell_idx[best_shell]) psi0(a) = psi(a);
    psi0.normalize();
    const double lam_shell = spectrum.shells[best_shell].lambda;

    Eigen::MatrixXcd psi_mat(nb, 1);
    psi_mat.col(0) = psi0;
    Eigen::MatrixXcd rot_mat = bas.rotation_matrix(a) * psi_mat;
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(1);
    Eigen::MatrixXcd omega_diff = df.omega_matrix(rot_mat, ones) - df.omega_matrix(psi_mat, ones);

    Eigen::VectorXcd src = omega_diff * psi0;
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(nb);
    for (int b = 0; b < nb; ++b) {
        if (bas.element(b).lambda >= 0.0) continue;
        // residue of the resolvent product: the negative level enters first
        t(b) = src(b) / (bas.element(b).lambda - lam_shell);
    }
    out.predicted_norm = kappa * t.norm();
    Eigen::VectorXcd diff = exact - kappa * t;
    out.difference_norm = diff.norm();
    return out;
}

std::string GameReport::to_kv() const {
    std::ostringstream os;
    os.precision(15);
    os << "e_level = " << e_level << "\n";
    os << "E_level = " << big_e_level << "\n";
    os << "fixedpoint = " << (fixedpoint ? "true" : "false") << "\n";
    os << "status = " << status << "\n";
    os << "classification = " << classification << "\n";
    os << "gap = " << gap << "\n";
    os << "projector_angle = " << projector_angle << "\n";
    os << "best_candidate = " << best_candidate << "\n";
    return os.str();
}

std::string GameReport::trace_csv() const {
    std::ostringstream os;
    os.precision(15);
    os << "iter,inf_value,subspace_angle\n";
    for (const auto& row : trace)
        os << row.iter << "," << row.inf_value << "," << row.subspace_angle << "\n";
    return os.str();
}

} // namespace dflab
