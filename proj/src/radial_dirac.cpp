#include "dflab/radial_dirac.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace dflab {

RadialBasis::RadialBasis(RadialGrid grid, int order) : grid_(std::move(grid)), order_(order) {
    BSplineBasis spl(grid_.breakpoints(), order_);
    n_ = spl.size() - 2;
    const int np = grid_.n_points();
    const int nq = grid_.points_per_interval();
    for (auto& t : tab_) t.assign(static_cast<size_t>(np) * order_, 0.0);
    std::vector<std::vector<double>> vals;
    for (int g = 0; g < np; ++g) {
        const int iv = g / nq;
        spl.eval_on_interval(iv, grid_.points()[g], 2, vals);
        for (int d = 0; d <= 2; ++d)
            for (int j = 0; j < order_; ++j)
                tab_[d][static_cast<size_t>(g) * order_ + j] = vals[d][j];
    }
}

std::vector<double> RadialBasis::tabulate(int d, int j) const {
    std::vector<double> out(grid_.n_points(), 0.0);
    const int nq = grid_.points_per_interval();
    for (int g = 0; g < grid_.n_points(); ++g) {
        const int loc = (j + 1) - g / nq;
        if (loc >= 0 && loc < order_) out[g] = local(d, g, loc);
    }
    return out;
}

namespace {

int count_nodes(const std::vector<double>& f) {
    double peak = 0.0;
    for (double v : f) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return 0;
    const double floor = 1e-7 * peak;
    int nodes = 0;
    double last = 0.0;
    for (double v : f) {
        if (std::abs(v) < floor) continue;
        if (last != 0.0 && std::signbit(v) != std::signbit(last)) ++nodes;
        last = v;
    }
    return nodes;
}

void fix_sign(std::vector<double>& p, std::vector<double>* q) {
    int gmax = 0;
    for (size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) > std::abs(p[gmax])) gmax = static_cast<int>(i);
    if (p[gmax] < 0.0) {
        for (auto& v : p) v = -v;
        if (q)
            for (auto& v : *q) v = -v;
    }
}

} // namespace

ChannelMatrices channel_matrix(const Channel& ch, double c, const Potential& v,
                               const RadialBasis& basis) {
    if (c <= 1.0) throw std::invalid_argument("channel_matrix: need c > 1");
    const auto& grid = basis.grid();
    const int n = basis.n();
    const int order = basis.order();
    const double kap = ch.kappa;
    const double c2 = c * c;
    const double half_inv_c = 0.5 / c;

    ChannelMatrices out;
    out.h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    out.s = Eigen::MatrixXd::Zero(2 * n, 2 * n);

    // per-point local DKB component values
    std::vector<int> idx(2 * order);
    std::vector<double> P(2 * order), Q(2 * order), dP(2 * order), dQ(2 * order);

    for (int g = 0; g < grid.n_points(); ++g) {
        const double r = grid.points()[g];
        const double w = grid.weights()[g];
        const double vr = v(r);
        const double invr = 1.0 / r;

        int cnt = 0;
        for (int loc = 0; loc < order; ++loc) {
            const int jk = basis.kept_index(g, loc);
            if (jk < 0) continue;
            const double b = basis.local(0, g, loc);
            const double db = basis.local(1, g, loc);
            const double ddb = basis.local(2, g, loc);
            // large-dominant function
            idx[cnt] = jk;
            P[cnt] = b;
            dP[cnt] = db;
            Q[cnt] = half_inv_c * (db + kap * b * invr);
            dQ[cnt] = half_inv_c * (ddb + kap * db * invr - kap * b * invr * invr);
            ++cnt;
            // small-dominant function
            idx[cnt] = n + jk;
            Q[cnt] = b;
            dQ[cnt] = db;
            P[cnt] = half_inv_c * (db - kap * b * invr);
            dP[cnt] = half_inv_c * (ddb - kap * db * invr + kap * b * invr * invr);
            ++cnt;
        }

        for (int a = 0; a < cnt; ++a) {
            const double hp = (vr + c2) * P[a] + c * (-dQ[a] + kap * invr * Q[a]);
            const double hq = c * (dP[a] + kap * invr * P[a]) + (vr - c2) * Q[a];
            for (int b = 0; b < cnt; ++b) {
                out.s(idx[b], idx[a]) += w * (P[b] * P[a] + Q[b] * Q[a]);
                out.h(idx[b], idx[a]) += w * (P[b] * hp + Q[b] * hq);
            }
        }
    }
    out.h = 0.5 * (out.h + out.h.transpose()).eval();
    out.s = 0.5 * (out.s + out.s.transpose()).eval();
    return out;
}

ChannelSpectrum solve_channel(const Channel& ch, double c, const Potential& v,
                              const RadialBasis& basis) {
    auto mats = channel_matrix(ch, c, v, basis);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.h, mats.s);
    if (es.info() != Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(mats.s);
        const double cond =
            svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
        throw std::runtime_error("solve_channel: eigensolver failed, overlap condition ~ " +
                                 std::to_string(cond));
    }

    const auto& grid = basis.grid();
    const int n = basis.n();
    const int np = grid.n_points();
    const double c2 = c * c;
    const double kap = ch.kappa;

    ChannelSpectrum spec;
    spec.channel = ch;
    spec.all.resize(2 * n);

    // tabulate spline values once
    std::vector<std::vector<double>> bt(n), dbt(n);
    for (int j = 0; j < n; ++j) {
        bt[j] = basis.tabulate(0, j);
        dbt[j] = basis.tabulate(1, j);
    }

    for (int k = 0; k < 2 * n; ++k) {
        RadialOrbital orb;
        orb.channel = ch;
        orb.lambda = es.eigenvalues()(k);
        orb.gap_state = orb.lambda > 0.0 && orb.lambda < c2;
        orb.p.assign(np, 0.0);
        orb.q.assign(np, 0.0);
        const auto& vec = es.eigenvectors().col(k);
        for (int j = 0; j < n; ++j) {
            const double cl = vec(j), cs = vec(n + j);
            if (cl == 0.0 && cs == 0.0) continue;
            for (int g = 0; g < np; ++g) {
                const double b = bt[j][g];
                if (b == 0.0 && dbt[j][g] == 0.0) continue;
                const double db = dbt[j][g];
                const double invr = 1.0 / grid.points()[g];
                orb.p[g] += cl * b + cs * (0.5 / c) * (db - kap * b * invr);
                orb.q[g] += cl * (0.5 / c) * (db + kap * b * invr) + cs * b;
            }
        }
        // normalize in the discrete inner product
        std::vector<double> dens(np);
        for (int g = 0; g < np; ++g) dens[g] = orb.p[g] * orb.p[g] + orb.q[g] * orb.q[g];
        const double nrm = std::sqrt(grid.integrate(dens));
        for (int g = 0; g < np; ++g) {
            orb.p[g] /= nrm;
            orb.q[g] /= nrm;
        }
        fix_sign(orb.p, &orb.q);
        orb.nodes = count_nodes(orb.p);
        spec.all[k] = std::move(orb);
    }

    // spurious-state diagnostic: each gap state must have a nonrelativistic
    // partner of the same l with matching node count
    auto schro = schrodinger_channel(ch.l_large(), v, basis);
    int si = 0;
    for (auto& orb : spec.all) {
        if (!orb.gap_state) continue;
        if (si < static_cast<int>(schro.size())) {
            const double mu = schro[si].lambda;
            const double shift = orb.lambda - c2;
            const bool energy_ok = std::abs(shift - mu) <= std::max(0.3 * std::abs(mu), 40.0 / c2);
            const bool nodes_ok = orb.nodes == schro[si].nodes;
            orb.spurious = !(energy_ok || nodes_ok);
        }
        ++si;
    }
    return spec;
}

std::vector<const RadialOrbital*> ChannelSpectrum::gap() const {
    std::vector<const RadialOrbital*> out;
    for (const auto& o : all)
        if (o.gap_state) out.push_back(&o);
    return out;
}

std::vector<const RadialOrbital*> ChannelSpectrum::negative() const {
    // `all` is ascending; return negatives nearest the gap first
    std::vector<const RadialOrbital*> neg;
    for (const auto& o : all)
        if (o.lambda < 0.0) neg.push_back(&o);
    std::reverse(neg.begin(), neg.end());
    return neg;
}

std::vector<RadialOrbital> schrodinger_channel(int l, const Potential& v,
                                               const RadialBasis& basis) {
    if (l < 0) throw std::invalid_argument("schrodinger_channel: l must be >= 0");
    const auto& grid = basis.grid();
    const int n = basis.n();
    const int order = basis.order();

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    const double ll = 0.5 * l * (l + 1);

    std::vector<int> idx(order);
    std::vector<double> bv(order), dv(order);
    for (int g = 0; g < grid.n_points(); ++g) {
        const double r = grid.points()[g];
        const double w = grid.weights()[g];
        const double veff = v(r) + ll / (r * r);
        int cnt = 0;
        for (int loc = 0; loc < order; ++loc) {
            const int jk = basis.kept_index(g, loc);
            if (jk < 0) continue;
            idx[cnt] = jk;
            bv[cnt] = basis.local(0, g, loc);
            dv[cnt] = basis.local(1, g, loc);
            ++cnt;
        }
        for (int a = 0; a < cnt; ++a)
            for (int b = 0; b <= a; ++b) {
                const double hv = 0.5 * dv[a] * dv[b] + veff * bv[a] * bv[b];
                h(idx[a], idx[b]) += w * hv;
                s(idx[a], idx[b]) += w * bv[a] * bv[b];
                if (a != b) {
                    h(idx[b], idx[a]) += w * hv;
                    s(idx[b], idx[a]) += w * bv[a] * bv[b];
                }
            }
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(h, s);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("schrodinger_channel: eigensolver failed");

    std::vector<RadialOrbital> out(n);
    for (int k = 0; k < n; ++k) {
        RadialOrbital orb;
        orb.channel = Channel{l == 0 ? -1 : l}; // carries l through l_large
        orb.lambda = es.eigenvalues()(k);
        orb.p.assign(grid.n_points(), 0.0);
        orb.dp.assign(grid.n_points(), 0.0);
        for (int j = 0; j < n; ++j) {
            const double cj = es.eigenvectors()(j, k);
            if (cj == 0.0) continue;
            auto tj = basis.tabulate(0, j);
            auto dj = basis.tabulate(1, j);
            for (int g = 0; g < grid.n_points(); ++g) {
                orb.p[g] += cj * tj[g];
                orb.dp[g] += cj * dj[g];
            }
        }
        std::vector<double> dens(grid.n_points());
        for (int g = 0; g < grid.n_points(); ++g) dens[g] = orb.p[g] * orb.p[g];
        const double nrm = std::sqrt(grid.integrate(dens));
        for (auto& x : orb.p) x /= nrm;
        for (auto& x : orb.dp) x /= nrm;
        fix_sign(orb.p, &orb.dp);
        orb.nodes = count_nodes(orb.p);
        out[k] = std::move(orb);
    }
    return out;
}

SpectrumTable assemble_spectrum(const std::vector<ChannelSpectrum>& channels, double c,
                                double cluster_tol, int max_shells) {
    struct Entry {
        double lambda;
        int ch, orb;
        int degeneracy;
        int kappa;
    };
    std::vector<Entry> entries;
    for (int ci = 0; ci < static_cast<int>(channels.size()); ++ci) {
        auto gap = channels[ci].gap();
        for (int oi = 0; oi < static_cast<int>(gap.size()); ++oi) {
            if (gap[oi]->spurious) continue;
            entries.push_back({gap[oi]->lambda, ci, oi, channels[ci].channel.degeneracy(),
                               channels[ci].channel.kappa});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.lambda < b.lambda; });

    SpectrumTable table;
    table.c = c;
    for (const auto& e : entries) {
        if (!table.shells.empty() &&
            e.lambda - table.shells.back().lambda < cluster_tol) {
            auto& sh = table.shells.back();
            sh.dim += e.degeneracy;
            sh.kappas.push_back(e.kappa);
            sh.members.push_back({e.ch, e.orb});
        } else {
            if (static_cast<int>(table.shells.size()) == max_shells) {
                // guard the boundary: the next state must be clearly separated
                if (e.lambda - table.shells.back().lambda < 10.0 * cluster_tol)
                    throw std::runtime_error(
                        "assemble_spectrum: ambiguous clustering at the shell limit; "
                        "refine the tolerance");
                break;
            }
            if (!table.shells.empty() &&
                e.lambda - table.shells.back().lambda < 10.0 * cluster_tol)
                throw std::runtime_error(
                    "assemble_spectrum: shells closer than 10x cluster tolerance; "
                    "refine the tolerance");
            Shell sh;
            sh.lambda = e.lambda;
            sh.dim = e.degeneracy;
            sh.kappas = {e.kappa};
            sh.members = {{e.ch, e.orb}};
            table.shells.push_back(std::move(sh));
        }
    }
    for (const auto& sh : table.shells)
        if (sh.dim < 2 || sh.dim % 2 != 0)
            throw std::runtime_error("assemble_spectrum: shell dimension must be even and >= 2");
    return table;
}

std::vector<ChannelSpectrum> solve_channels(int kmax, double c, const Potential& v,
                                            const RadialBasis& basis) {
    std::vector<Channel> chans;
    for (int ak = 1; ak <= kmax; ++ak) {
        chans.push_back(Channel{-ak});
        chans.push_back(Channel{ak});
    }
    std::vector<std::future<ChannelSpectrum>> futs;
    for (const auto& ch : chans)
        futs.push_back(std::async(std::launch::async,
                                  [&, ch] { return solve_channel(ch, c, v, basis); }));
    std::vector<ChannelSpectrum> out;
    for (auto& f : futs) out.push_back(f.get());
    return out;
}

std::string SpectrumTable::to_csv() const {
    std::ostringstream os;
    os.precision(15);
    os << "shell,lambda,lambda_minus_c2,dim,channels\n";
    for (size_t i = 0; i < shells.size(); ++i) {
        os << i + 1 << "," << shells[i].lambda << "," << shells[i].lambda - c * c << ","
           << shells[i].dim << ",";
        for (size_t k = 0; k < shells[i].kappas.size(); ++k)
            os << (k ? " " : "") << shells[i].kappas[k];
        os << "\n";
    }
    return os.str();
}

NonrelLimitStudy nonrel_limit_study(const std::vector<double>& c_list, const Potential& v,
                                    const RadialBasis& basis, int kmax, int states) {
    if (c_list.size() < 3)
        throw std::invalid_argument("nonrel_limit_study: need at least 3 values of c");
    NonrelLimitStudy study;
    std::vector<double> log_c, log_err;
    for (double c : c_list) {
        for (int ak = 1; ak <= kmax; ++ak) {
            for (int kappa : {-ak, ak}) {
                Channel ch{kappa};
                auto spec = solve_channel(ch, c, v, basis);
                auto schro = schrodinger_channel(ch.l_large(), v, basis);
                auto gap = spec.gap();
                for (int i = 0; i < states && i < static_cast<int>(gap.size()); ++i) {
                    NonrelLimitRow row;
                    row.c = c;
                    row.kappa = kappa;
                    row.index = i;
                    row.dirac_shift = gap[i]->lambda - c * c;
                    row.mu = schro[i].lambda;
                    row.error = std::abs(row.dirac_shift - row.mu);
                    study.rows.push_back(row);
                    if (kappa == -1 && i == 0) {
                        log_c.push_back(std::log(c));
                        log_err.push_back(std::log(std::max(row.error, 1e-300)));
                    }
                }
            }
        }
    }
    // least-squares slope of log(err) vs log(c) for the lowest s state
    const int m = static_cast<int>(log_c.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += log_c[i];
        sy += log_err[i];
        sxx += log_c[i] * log_c[i];
        sxy += log_c[i] * log_err[i];
    }
    study.slope_first_state = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return study;
}

std::string NonrelLimitStudy::to_csv() const {
    std::ostringstream os;
    os.precision(15);
    os << "c,kappa,index,dirac_shift,mu,error\n";
    for (const auto& r : rows)
        os << r.c << "," << r.kappa << "," << r.index << "," << r.dirac_shift << "," << r.mu << ","
           << r.error << "\n";
    return os.str();
}

} // namespace dflab
