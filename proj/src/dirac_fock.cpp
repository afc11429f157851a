#include "dflab/dirac_fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dflab {

namespace {
constexpr double kGapRuleFactor = 1e-9; // zero-eigenvalue guard, in units of c^2
} // namespace

OrbitalBasis::OrbitalBasis(const RadialBasis& rbasis, const Potential& v, double c, int kmax,
                           int n_pos, int n_neg, double cluster_tol, int max_shells)
    : rbasis_(rbasis), c_(c) {
    if (n_pos < 1 || n_neg < 0) throw std::invalid_argument("OrbitalBasis: bad truncation");
    channels_ = solve_channels(kmax, c, v, rbasis_);
    spectrum_ = assemble_spectrum(channels_, c, cluster_tol, max_shells);

    for (const auto& chs : channels_) {
        // negatives nearest the gap, then gap/positive states, all ascending
        std::vector<const RadialOrbital*> sel;
        std::vector<const RadialOrbital*> neg, pos;
        for (const auto& orb : chs.all) {
            if (orb.lambda < 0.0) neg.push_back(&orb);
            else pos.push_back(&orb);
        }
        if (static_cast<int>(neg.size()) < n_neg || static_cast<int>(pos.size()) < n_pos)
            throw std::invalid_argument("OrbitalBasis: channel too small for the truncation");
        for (int i = static_cast<int>(neg.size()) - n_neg; i < static_cast<int>(neg.size()); ++i)
            sel.push_back(neg[i]);
        for (int i = 0; i < n_pos; ++i) sel.push_back(pos[i]);

        const int tj = chs.channel.tj();
        for (int n = 0; n < static_cast<int>(sel.size()); ++n) {
            const int rad_id = static_cast<int>(radials_.size());
            radials_.push_back(sel[n]);
            for (int im = 0; im <= tj; ++im) {
                BasisElement el;
                el.kappa = chs.channel.kappa;
                el.n = n;
                el.tm = tj - 2 * im; // decreasing m
                el.lambda = sel[n]->lambda;
                el.radial_id = rad_id;
                el.negative = sel[n]->lambda < 0.0;
                index_[{el.kappa, el.n, el.tm}] = static_cast<int>(elements_.size());
                elements_.push_back(el);
            }
        }
    }

    // <a|V|b>: diagonal in (kappa, m), dense in the radial index
    const auto& grid = rbasis_.grid();
    const int nb = size();
    vmat_ = Eigen::MatrixXd::Zero(nb, nb);
    std::vector<double> vtab(grid.n_points());
    for (int g = 0; g < grid.n_points(); ++g) vtab[g] = v(grid.points()[g]);
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b <= a; ++b) {
            const auto& ea = elements_[a];
            const auto& eb = elements_[b];
            if (ea.kappa != eb.kappa || ea.tm != eb.tm) continue;
            const auto& rho = pair_density(ea.radial_id, eb.radial_id);
            double s = 0.0;
            for (int g = 0; g < grid.n_points(); ++g) s += grid.weights()[g] * rho[g] * vtab[g];
            vmat_(a, b) = s;
            vmat_(b, a) = s;
        }
}

int OrbitalBasis::index_of(int kappa, int n, int tm) const {
    auto it = index_.find({kappa, n, tm});
    if (it == index_.end()) throw std::out_of_range("OrbitalBasis::index_of");
    return it->second;
}

Eigen::VectorXd OrbitalBasis::lambdas() const {
    Eigen::VectorXd l(size());
    for (int a = 0; a < size(); ++a) l(a) = elements_[a].lambda;
    return l;
}

const std::vector<double>& OrbitalBasis::pair_density(int rad_a, int rad_b) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto key = std::minmax(rad_a, rad_b);
    auto it = pair_cache_.find(key);
    if (it != pair_cache_.end()) return it->second;
    const auto& oa = *radials_[rad_a];
    const auto& ob = *radials_[rad_b];
    std::vector<double> rho(oa.p.size());
    const bool dirac = !oa.q.empty() && !ob.q.empty();
    for (size_t g = 0; g < rho.size(); ++g)
        rho[g] = oa.p[g] * ob.p[g] + (dirac ? oa.q[g] * ob.q[g] : 0.0);
    return pair_cache_.emplace(key, std::move(rho)).first->second;
}

double OrbitalBasis::slater(int rad_a, int rad_b, int rad_c, int rad_d, int k) const {
    // canonical key: R^k(ab,cd) = R^k(ba,dc) = R^k(cd,ab)
    std::pair<int, int> p1 = std::minmax(rad_a, rad_c);
    std::pair<int, int> p2 = std::minmax(rad_b, rad_d);
    if (p2 < p1) std::swap(p1, p2);
    const auto key = std::make_tuple(k, p1.first, p1.second, p2.first, p2.second);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = slater_cache_.find(key);
        if (it != slater_cache_.end()) return it->second;
    }
    const auto& rho1 = pair_density(p1.first, p1.second);
    const auto& rho2 = pair_density(p2.first, p2.second);
    const double val = slater_rk(rbasis_.grid(), rho1, rho2, k);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return slater_cache_.emplace(key, val).first->second;
}

double OrbitalBasis::angular_coeff(int a, int b, int k) const {
    const auto& ea = elements_[a];
    const auto& eb = elements_[b];
    return gaunt_cached(ea.kappa, ea.tm, eb.kappa, eb.tm, k);
}

double OrbitalBasis::gaunt_cached(int kappa_a, int tma, int kappa_b, int tmb, int k) const {
    const auto key = std::make_tuple(kappa_a, tma, kappa_b, tmb, k);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = gaunt_cache_.find(key);
    if (it != gaunt_cache_.end()) return it->second;
    const double val = gaunt(kappa_a, tma, kappa_b, tmb, k, (tma - tmb) / 2);
    return gaunt_cache_.emplace(key, val).first->second;
}

double OrbitalBasis::two_electron(int a, int b, int c, int d) const {
    const auto& ea = elements_[a];
    const auto& eb = elements_[b];
    const auto& ec = elements_[c];
    const auto& ed = elements_[d];
    if (ea.tm + eb.tm != ec.tm + ed.tm) return 0.0;
    const int k_ub = std::min((Channel{ea.kappa}.tj() + Channel{ec.kappa}.tj()) / 2,
                              (Channel{eb.kappa}.tj() + Channel{ed.kappa}.tj()) / 2);
    double sum = 0.0;
    for (int k = 0; k <= k_ub; ++k) {
        const double ang1 = angular_coeff(a, c, k);
        if (ang1 == 0.0) continue;
        const double ang2 = angular_coeff(d, b, k);
        if (ang2 == 0.0) continue;
        sum += ang1 * ang2 *
               slater(ea.radial_id, eb.radial_id, ec.radial_id, ed.radial_id, k);
    }
    return sum;
}

Eigen::MatrixXcd OrbitalBasis::rotation_matrix(const RotationSU2& rot) const {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(size(), size());
    // blocks over (kappa, n)
    std::map<std::pair<int, int>, std::vector<int>> blocks; // (kappa,n) -> indices by im
    for (int a = 0; a < size(); ++a) {
        const auto& e = elements_[a];
        auto& vec = blocks[{e.kappa, e.n}];
        const int tj = Channel{e.kappa}.tj();
        if (vec.empty()) vec.assign(tj + 1, -1);
        vec[(tj - e.tm) / 2] = a;
    }
    for (const auto& [key, idx] : blocks) {
        const int tj = Channel{key.first}.tj();
        Eigen::MatrixXcd d = wigner_block(tj, rot);
        for (int i = 0; i <= tj; ++i)
            for (int j = 0; j <= tj; ++j) u(idx[i], idx[j]) = d(i, j);
    }
    return u;
}

const OrbitalBasis::FreeDirac& OrbitalBasis::free_dirac() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (!free_dirac_) {
        Eigen::MatrixXd hfree = Eigen::MatrixXd(lambdas().asDiagonal()) - vmat_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hfree);
        auto fd = std::make_unique<FreeDirac>();
        Eigen::VectorXd absw = es.eigenvalues().cwiseAbs();
        fd->b_half = es.eigenvectors() * absw.cwiseSqrt().asDiagonal() *
                     es.eigenvectors().transpose();
        fd->b_minus_half = es.eigenvectors() * absw.cwiseSqrt().cwiseInverse().asDiagonal() *
                           es.eigenvectors().transpose();
        Eigen::VectorXd chi(es.eigenvalues().size());
        for (int i = 0; i < chi.size(); ++i) chi(i) = es.eigenvalues()(i) > 0.0 ? 1.0 : 0.0;
        fd->lambda_plus = es.eigenvectors() * chi.asDiagonal() * es.eigenvectors().transpose();
        free_dirac_ = std::move(fd);
    }
    return *free_dirac_;
}

void OrbitalBasis::save_slater_cache(const std::string& path, uint64_t config_hash) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_slater_cache: cannot open " + path);
    const char magic[8] = {'d', 'f', 'l', 'a', 'b', 'R', 'k', '1'};
    os.write(magic, 8);
    os.write(reinterpret_cast<const char*>(&config_hash), 8);
    uint64_t count = slater_cache_.size();
    os.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& [key, val] : slater_cache_) {
        uint32_t rec[5] = {static_cast<uint32_t>(std::get<1>(key)),
                           static_cast<uint32_t>(std::get<2>(key)),
                           static_cast<uint32_t>(std::get<3>(key)),
                           static_cast<uint32_t>(std::get<4>(key)),
                           static_cast<uint32_t>(std::get<0>(key))};
        os.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        os.write(reinterpret_cast<const char*>(&val), 8);
    }
}

bool OrbitalBasis::load_slater_cache(const std::string& path, uint64_t config_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[8];
    is.read(magic, 8);
    if (std::string(magic, 8) != "dflabRk1") return false;
    uint64_t hash = 0, count = 0;
    is.read(reinterpret_cast<char*>(&hash), 8);
    if (hash != config_hash) return false;
    is.read(reinterpret_cast<char*>(&count), 8);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t rec[5];
        double val;
        is.read(reinterpret_cast<char*>(rec), sizeof(rec));
        is.read(reinterpret_cast<char*>(&val), 8);
        if (!is) return false;
        slater_cache_[{static_cast<int>(rec[4]), static_cast<int>(rec[0]),
                       static_cast<int>(rec[1]), static_cast<int>(rec[2]),
                       static_cast<int>(rec[3])}] = val;
    }
    return true;
}

// ---------------------------------------------------------------------------

DiracFock::JkMatrices DiracFock::build_jk(const Eigen::MatrixXcd& vectors,
                                          const Eigen::VectorXd& weights) const {
    const auto& bas = *basis_;
    const auto& grid = bas.grid();
    const int nb = bas.size();
    const int np = grid.n_points();
    const int nvec = static_cast<int>(vectors.cols());

    Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(nb, nb);
    Eigen::MatrixXcd kx = Eigen::MatrixXcd::Zero(nb, nb);

    // (kappa, tm) channel list and per-orbital radial bundles F, G
    std::vector<std::pair<int, int>> chm; // (kappa, tm)
    for (int a = 0; a < nb; ++a) {
        auto key = std::make_pair(bas.element(a).kappa, bas.element(a).tm);
        if (std::find(chm.begin(), chm.end(), key) == chm.end()) chm.push_back(key);
    }
    const int ncm = static_cast<int>(chm.size());
    auto chm_index = [&](int kappa, int tm) {
        for (int i = 0; i < ncm; ++i)
            if (chm[i].first == kappa && chm[i].second == tm) return i;
        return -1;
    };

    // bundles[i][cm]: F (large) and G (small) radial sums
    std::vector<std::vector<Eigen::VectorXcd>> fb(nvec), gb(nvec);
    for (int i = 0; i < nvec; ++i) {
        fb[i].assign(ncm, Eigen::VectorXcd());
        gb[i].assign(ncm, Eigen::VectorXcd());
        for (int a = 0; a < nb; ++a) {
            const cplx ca = vectors(a, i);
            if (std::abs(ca) < 1e-300) continue;
            const auto& el = bas.element(a);
            const int cm = chm_index(el.kappa, el.tm);
            auto& f = fb[i][cm];
            auto& g = gb[i][cm];
            if (f.size() == 0) {
                f = Eigen::VectorXcd::Zero(np);
                g = Eigen::VectorXcd::Zero(np);
            }
            const auto& orb = bas.radial(el.radial_id);
            for (int gp = 0; gp < np; ++gp) {
                f(gp) += ca * orb.p[gp];
                g(gp) += ca * orb.q[gp];
            }
        }
    }

    // maximal multipole order from the channel js
    int tj_max = 0;
    for (auto [kappa, tm] : chm) tj_max = std::max(tj_max, Channel{kappa}.tj());
    const int k_max = tj_max;

    // ---- direct term -------------------------------------------------------
    // source t_kq(r) = sum_i w_i sum_{cd} <Omega_d|C^k_q|Omega_c>
    //                   (conj(F_c) F_d + conj(G_c) G_d)(r)
    for (int k = 0; k <= k_max; ++k) {
        for (int q = -k; q <= k; ++q) {
            Eigen::VectorXcd t = Eigen::VectorXcd::Zero(np);
            bool any = false;
            for (int i = 0; i < nvec; ++i) {
                for (int cd = 0; cd < ncm; ++cd) {
                    if (fb[i][cd].size() == 0) continue;
                    for (int cc = 0; cc < ncm; ++cc) {
                        if (fb[i][cc].size() == 0) continue;
                        if (chm[cd].second - chm[cc].second != 2 * q) continue;
                        const double ang = bas.gaunt_cached(chm[cd].first, chm[cd].second,
                                                            chm[cc].first, chm[cc].second, k);
                        if (ang == 0.0) continue;
                        any = true;
                        t += (weights(i) * ang) *
                             (fb[i][cc].conjugate().cwiseProduct(fb[i][cd]) +
                              gb[i][cc].conjugate().cwiseProduct(gb[i][cd]));
                    }
                }
            }
            if (!any) continue;
            std::vector<double> tre(np), tim(np);
            for (int gp = 0; gp < np; ++gp) {
                tre[gp] = t(gp).real();
                tim[gp] = t(gp).imag();
            }
            auto ure = multipole_potential(grid, tre, k);
            auto uim = multipole_potential(grid, tim, k);

            for (int a = 0; a < nb; ++a) {
                const auto& ea = bas.element(a);
                for (int b = 0; b < nb; ++b) {
                    const auto& eb = bas.element(b);
                    if (ea.tm - eb.tm != 2 * q) continue;
                    const double ang = bas.angular_coeff(a, b, k);
                    if (ang == 0.0) continue;
                    const auto& rho = bas.pair_density(ea.radial_id, eb.radial_id);
                    cplx s = 0.0;
                    for (int gp = 0; gp < np; ++gp)
                        s += grid.weights()[gp] * rho[gp] * cplx(ure.u[gp], uim.u[gp]);
                    j(a, b) += ang * s;
                }
            }
        }
    }

    // ---- exchange term -----------------------------------------------------
    for (int i = 0; i < nvec; ++i) {
        for (int k = 0; k <= k_max; ++k) {
            for (int q = -k; q <= k; ++q) {
                // active (kappa_a, tm_a) channels and their A/B bundles
                std::vector<Eigen::VectorXcd> abun(ncm), bbun(ncm);
                std::vector<char> active(ncm, 0);
                for (int ca = 0; ca < ncm; ++ca) {
                    Eigen::VectorXcd abu, bbu;
                    for (int cc = 0; cc < ncm; ++cc) {
                        if (fb[i][cc].size() == 0) continue;
                        if (chm[ca].second - chm[cc].second != 2 * q) continue;
                        const double ang = bas.gaunt_cached(chm[ca].first, chm[ca].second,
                                                            chm[cc].first, chm[cc].second, k);
                        if (ang == 0.0) continue;
                        if (abu.size() == 0) {
                            abu = Eigen::VectorXcd::Zero(np);
                            bbu = Eigen::VectorXcd::Zero(np);
                        }
                        abu += ang * fb[i][cc];
                        bbu += ang * gb[i][cc];
                    }
                    if (abu.size() != 0) {
                        abun[ca] = std::move(abu);
                        bbun[ca] = std::move(bbu);
                        active[ca] = 1;
                    }
                }

                // T_a(r) and the kernel transform of conj(T_b)
                std::vector<int> alist;
                for (int a = 0; a < nb; ++a) {
                    const int ca = chm_index(bas.element(a).kappa, bas.element(a).tm);
                    if (active[ca]) alist.push_back(a);
                }
                if (alist.empty()) continue;

                const int na = static_cast<int>(alist.size());
                Eigen::MatrixXcd tmat(np, na), vmat(np, na);
                std::vector<double> tre(np), tim(np);
                for (int ia = 0; ia < na; ++ia) {
                    const auto& el = bas.element(alist[ia]);
                    const int ca = chm_index(el.kappa, el.tm);
                    const auto& orb = bas.radial(el.radial_id);
                    for (int gp = 0; gp < np; ++gp) {
                        const cplx t = orb.p[gp] * abun[ca](gp) + orb.q[gp] * bbun[ca](gp);
                        tmat(gp, ia) = grid.weights()[gp] * t;
                        tre[gp] = t.real();
                        tim[gp] = -t.imag(); // conjugate for the ket side
                    }
                    auto pre = multipole_potential(grid, tre, k);
                    auto pim = multipole_potential(grid, tim, k);
                    for (int gp = 0; gp < np; ++gp) vmat(gp, ia) = cplx(pre.u[gp], pim.u[gp]);
                }
                Eigen::MatrixXcd kblock = tmat.transpose() * vmat;
                for (int ia = 0; ia < na; ++ia)
                    for (int ib = 0; ib < na; ++ib)
                        kx(alist[ia], alist[ib]) += weights(i) * kblock(ia, ib);
            }
        }
    }

    JkMatrices out;
    out.j = 0.5 * (j + j.adjoint());
    out.k = 0.5 * (kx + kx.adjoint());
    return out;
}

Eigen::MatrixXcd DiracFock::omega_matrix(const Eigen::MatrixXcd& vectors,
                                         const Eigen::VectorXd& weights) const {
    auto jk = build_jk(vectors, weights);
    return jk.j - jk.k;
}

Eigen::MatrixXcd DiracFock::omega_matrix(const Eigen::MatrixXcd& hermitian_density) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_density);
    // keep numerically relevant rank only
    const double floor = 1e-16 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<int> keep;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > floor) keep.push_back(i);
    Eigen::MatrixXcd vecs(hermitian_density.rows(), keep.size());
    Eigen::VectorXd w(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        vecs.col(i) = es.eigenvectors().col(keep[i]);
        w(i) = es.eigenvalues()(keep[i]);
    }
    if (keep.empty()) return Eigen::MatrixXcd::Zero(hermitian_density.rows(), hermitian_density.cols());
    return omega_matrix(vecs, w);
}

EnergyBreakdown DiracFock::df_energy(const OccupiedSet& w, double kappa) const {
    if (w.gram_error() > 1e-6)
        throw std::invalid_argument("df_energy: occupied set violates the Gram identity");
    EnergyBreakdown out;
    out.kappa = kappa;
    out.c = c();
    const Eigen::VectorXd lam = basis_->lambdas();
    for (int i = 0; i < w.n(); ++i)
        for (int a = 0; a < dim(); ++a) out.one_body += lam(a) * std::norm(w.frame(a, i));

    if (kappa != 0.0) {
        // occupied-only route: both terms reduce to slater kernels of the
        // occupied transition densities, O(N^2) rather than matrix builds
        const auto& bas = *basis_;
        const auto& grid = bas.grid();
        const int nb = bas.size();
        const int np = grid.n_points();
        const int n = w.n();

        std::vector<std::pair<int, int>> chm;
        for (int a = 0; a < nb; ++a) {
            auto key = std::make_pair(bas.element(a).kappa, bas.element(a).tm);
            if (std::find(chm.begin(), chm.end(), key) == chm.end()) chm.push_back(key);
        }
        const int ncm = static_cast<int>(chm.size());
        std::vector<std::vector<Eigen::VectorXcd>> fbun(n), gbun(n);
        for (int i = 0; i < n; ++i) {
            fbun[i].assign(ncm, Eigen::VectorXcd());
            gbun[i].assign(ncm, Eigen::VectorXcd());
            for (int a = 0; a < nb; ++a) {
                const cplx ca = w.frame(a, i);
                if (std::abs(ca) < 1e-300) continue;
                const auto& el = bas.element(a);
                int cm = 0;
                while (chm[cm] != std::make_pair(el.kappa, el.tm)) ++cm;
                if (fbun[i][cm].size() == 0) {
                    fbun[i][cm] = Eigen::VectorXcd::Zero(np);
                    gbun[i][cm] = Eigen::VectorXcd::Zero(np);
                }
                const auto& orb = bas.radial(el.radial_id);
                for (int gp = 0; gp < np; ++gp) {
                    fbun[i][cm](gp) += ca * orb.p[gp];
                    gbun[i][cm](gp) += ca * orb.q[gp];
                }
            }
        }
        int tj_max = 0;
        for (auto [kappa_c, tm] : chm) tj_max = std::max(tj_max, Channel{kappa_c}.tj());

        // transition densities tau_{ij,kq}(r); direct couples (ii),(jj),
        // exchange couples (ij),(ji)
        auto transition = [&](int i, int jj, int k, int q) {
            Eigen::VectorXcd t = Eigen::VectorXcd::Zero(np);
            bool any = false;
            for (int cd = 0; cd < ncm; ++cd) {
                if (fbun[i][cd].size() == 0) continue;
                for (int cc = 0; cc < ncm; ++cc) {
                    if (fbun[jj][cc].size() == 0) continue;
                    if (chm[cd].second - chm[cc].second != 2 * q) continue;
                    const double ang = bas.gaunt_cached(chm[cd].first, chm[cd].second, chm[cc].first,
                                                        chm[cc].second, k);
                    if (ang == 0.0) continue;
                    any = true;
                    // component of psi_i^dagger psi_j along C^k_q
                    t += ang * fbun[jj][cc].conjugate().cwiseProduct(fbun[i][cd]);
                    t += ang * gbun[jj][cc].conjugate().cwiseProduct(gbun[i][cd]);
                }
            }
            if (!any) t.resize(0);
            return t;
        };
        auto kernel_pair = [&](const Eigen::VectorXcd& t1, const Eigen::VectorXcd& t2, int k) {
            // int t1(r) K_k(r,s) conj(t2(s))
            std::vector<double> re(np), im(np);
            for (int gp = 0; gp < np; ++gp) {
                re[gp] = t2(gp).real();
                im[gp] = -t2(gp).imag();
            }
            auto pre = multipole_potential(grid, re, k);
            auto pim = multipole_potential(grid, im, k);
            cplx s = 0.0;
            for (int gp = 0; gp < np; ++gp)
                s += grid.weights()[gp] * t1(gp) * cplx(pre.u[gp], pim.u[gp]);
            return s;
        };

        for (int k = 0; k <= tj_max; ++k)
            for (int q = -k; q <= k; ++q) {
                std::vector<std::vector<Eigen::VectorXcd>> tau(n);
                for (int i = 0; i < n; ++i) {
                    tau[i].resize(n);
                    for (int jj = 0; jj < n; ++jj) tau[i][jj] = transition(i, jj, k, q);
                }
                for (int i = 0; i < n; ++i)
                    for (int jj = 0; jj < n; ++jj) {
                        // direct: (ii|jj) with matching q on both sides
                        if (i <= jj && tau[i][i].size() && tau[jj][jj].size()) {
                            const double v = kernel_pair(tau[i][i], tau[jj][jj], k).real();
                            out.direct_term += (i == jj) ? v : 2.0 * v;
                        }
                        // exchange: <ij|ji> pairs the (i,j) transition with itself
                        if (tau[i][jj].size())
                            out.exchange_term += kernel_pair(tau[i][jj], tau[i][jj], k).real();
                    }
            }
    }
    out.total = out.one_body + 0.5 * kappa * (out.direct_term - out.exchange_term);
    return out;
}

MeanFieldState DiracFock::mean_field(const OccupiedSet& w, double kappa) const {
    if (w.gram_error() > 1e-6)
        throw std::invalid_argument("mean_field: occupied set violates the Gram identity");
    MeanFieldState mf;
    mf.kappa = kappa;
    mf.c = c();
    const int nb = dim();
    Eigen::MatrixXcd hlin = basis_->lambdas().asDiagonal();
    if (kappa != 0.0) {
        mf.omega = omega_matrix(w.frame, Eigen::VectorXd::Ones(w.n()));
    } else {
        mf.omega = Eigen::MatrixXcd::Zero(nb, nb);
    }
    mf.h = hlin + kappa * mf.omega;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mf.h);
    if (es.info() != Eigen::Success) throw std::runtime_error("mean_field: eigensolver failed");
    mf.eigs = es.eigenvalues();
    mf.vecs = es.eigenvectors();
    const double delta0 = kGapRuleFactor * c() * c();
    int npos = 0;
    for (int i = 0; i < nb; ++i) {
        if (std::abs(mf.eigs(i)) < delta0)
            throw std::runtime_error(
                "mean_field: eigenvalue inside the zero-gap guard; projector undefined");
        if (mf.eigs(i) > 0.0) ++npos;
    }
    mf.pos_basis = mf.vecs.rightCols(npos);
    mf.epsilon_closeness = epsilon_closeness(mf.pos_basis);
    return mf;
}

double DiracFock::epsilon_closeness(const Eigen::MatrixXcd& p_basis) const {
    const auto& fd = basis_->free_dirac();
    Eigen::MatrixXcd p = p_basis * p_basis.adjoint();
    Eigen::MatrixXcd m = fd.b_half * (p - fd.lambda_plus.cast<cplx>()) * fd.b_minus_half;
    // largest singular value = sqrt of the top eigenvalue of m^d m
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace {

// N lowest eigenvectors with eigenvalue above the zero guard
std::pair<Eigen::MatrixXcd, Eigen::VectorXd> lowest_positive(const Eigen::VectorXd& eigs,
                                                             const Eigen::MatrixXcd& vecs, int n,
                                                             double delta0) {
    std::vector<int> pos;
    for (int i = 0; i < eigs.size(); ++i)
        if (eigs(i) > delta0) pos.push_back(i);
    if (static_cast<int>(pos.size()) < n)
        throw std::runtime_error("scf: not enough positive levels for the occupation");
    Eigen::MatrixXcd w(vecs.rows(), n);
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) {
        w.col(i) = vecs.col(pos[i]);
        eps(i) = eigs(pos[i]);
    }
    return {w, eps};
}

} // namespace

ScfResult DiracFock::projected_minimize(const Eigen::MatrixXcd& p_basis, int n, double kappa,
                                        const ScfOptions& opts,
                                        const std::optional<Eigen::MatrixXcd>& start) const {
    const int nr = static_cast<int>(p_basis.cols());
    if (nr < n) throw std::invalid_argument("projected_minimize: projector rank below N");
    const int nb = dim();
    const double c2 = c() * c();
    const double delta0 = kGapRuleFactor * c2;
    const Eigen::MatrixXcd hlin = basis_->lambdas().asDiagonal();

    // restricted linear matrix
    Eigen::MatrixXcd hlin_r = p_basis.adjoint() * hlin * p_basis;

    Eigen::MatrixXcd wr; // restricted coordinates of the occupied frame
    if (start) {
        wr = p_basis.adjoint() * (*start);
        wr = orthonormalize(wr);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hlin_r);
        auto [w0, eps0] = lowest_positive(es.eigenvalues(), es.eigenvectors(), n, delta0);
        (void)eps0;
        wr = w0;
    }

    ScfResult res;
    double alpha = opts.damping;
    Eigen::MatrixXcd omega_mix = Eigen::MatrixXcd::Zero(nb, nb);
    bool have_mix = false;
    double prev_energy = std::numeric_limits<double>::quiet_NaN();

    // DIIS history over the restricted iterates; the error vector is the
    // commutator [H, rho], which vanishes exactly at self-consistency
    std::vector<Eigen::MatrixXcd> diis_omega;
    std::vector<Eigen::MatrixXcd> diis_err;
    const size_t diis_window = 8;

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        OccupiedSet w{p_basis * wr, "scf"};
        Eigen::MatrixXcd omega = (kappa != 0.0)
                                     ? omega_matrix(w.frame, Eigen::VectorXd::Ones(n))
                                     : Eigen::MatrixXcd::Zero(nb, nb);
        Eigen::MatrixXcd h = hlin + kappa * omega;
        Eigen::MatrixXcd hr = p_basis.adjoint() * h * p_basis;

        // energy and residual of the current iterate
        double energy = 0.0;
        {
            const Eigen::VectorXd lam = basis_->lambdas();
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < nb; ++a) energy += lam(a) * std::norm(w.frame(a, i));
            for (int i = 0; i < n; ++i)
                energy += 0.5 * kappa *
                          (w.frame.col(i).adjoint() * omega * w.frame.col(i))(0).real();
        }
        Eigen::MatrixXcd eps_mat = wr.adjoint() * hr * wr;
        Eigen::MatrixXcd resid = hr * wr - wr * eps_mat;
        const double rnorm = resid.colwise().norm().maxCoeff();
        res.trace.push_back({iter, energy, rnorm});

        const bool energy_ok =
            std::isnan(prev_energy) ||
            std::abs(energy - prev_energy) <=
                std::max(opts.tol * opts.tol, 64 * 2.3e-16 * std::abs(energy));
        if (rnorm <= opts.tol && energy_ok) {
            res.converged = true;
            res.iterations = iter;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hr);
            // multipliers of the converged orbitals
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eso(eps_mat);
            res.eps.eps = eso.eigenvalues();
            // canonical orbitals within the occupied space
            wr = wr * eso.eigenvectors();
            res.w = OccupiedSet{p_basis * wr, "scf"};
            if (opts.check_aufbau) {
                auto [wlow, elow] = lowest_positive(es.eigenvalues(), es.eigenvectors(), n, delta0);
                (void)wlow;
                res.aufbau_ok = true;
                for (int i = 0; i < n; ++i)
                    if (res.eps.eps(i) > elow(i) + 1e-7 * c2) res.aufbau_ok = false;
            }
            res.mf = mean_field(res.w, kappa);
            return res;
        }

        if (!std::isnan(prev_energy) && energy > prev_energy + 1e-13 * std::abs(prev_energy))
            alpha = std::max(0.02, 0.5 * alpha); // halve the mixing on an energy rise
        prev_energy = energy;

        // DIIS extrapolation of the mean field, damped mixing as fallback
        {
            Eigen::MatrixXcd rho_r = wr * wr.adjoint();
            Eigen::MatrixXcd err = hr * rho_r - rho_r * hr;
            diis_omega.push_back(omega);
            diis_err.push_back(err);
            if (diis_omega.size() > diis_window) {
                diis_omega.erase(diis_omega.begin());
                diis_err.erase(diis_err.begin());
            }
        }
        bool diis_ok = false;
        while (diis_omega.size() >= 2 && !diis_ok) {
            const int m = static_cast<int>(diis_omega.size());
            Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m + 1, m + 1);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    bmat(i, j) = (diis_err[i].adjoint() * diis_err[j]).trace().real();
            const double bscale = std::max(bmat.topLeftCorner(m, m).cwiseAbs().maxCoeff(), 1e-300);
            bmat.topLeftCorner(m, m) /= bscale;
            for (int i = 0; i < m; ++i) bmat(i, m) = bmat(m, i) = 1.0;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
            rhs(m) = 1.0;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
            Eigen::VectorXd sol = lu.solve(rhs);
            if (lu.isInvertible() && sol.allFinite() &&
                sol.head(m).cwiseAbs().maxCoeff() < 1e4) {
                omega_mix = Eigen::MatrixXcd::Zero(nb, nb);
                for (int i = 0; i < m; ++i) omega_mix += sol(i) * diis_omega[i];
                diis_ok = true;
            } else {
                // drop the oldest pair and retry with a better-conditioned set
                diis_omega.erase(diis_omega.begin());
                diis_err.erase(diis_err.begin());
            }
        }
        if (!diis_ok) {
            omega_mix = have_mix ? ((1.0 - alpha) * omega_mix + alpha * omega).eval() : omega;
        }
        have_mix = true;
        Eigen::MatrixXcd hr_eff = p_basis.adjoint() * (hlin + kappa * omega_mix) * p_basis;
        // level shift on virtuals stabilizes the early iterations; it decays
        // with the residual so it cannot throttle the endgame
        const double shift_eff = std::min(opts.level_shift, 10.0 * rnorm);
        hr_eff += shift_eff * (Eigen::MatrixXcd::Identity(nr, nr) - wr * wr.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hr_eff);
        auto [wnew, epsnew] = lowest_positive(es.eigenvalues(), es.eigenvectors(), n, delta0);
        (void)epsnew;
        wr = wnew;
    }
    res.converged = false;
    res.iterations = opts.max_iter;
    res.w = OccupiedSet{p_basis * wr, "scf-unconverged"};
    res.mf = mean_field(res.w, kappa);
    return res;
}

ScfResult DiracFock::scf_selfconsistent(int n, double kappa, const ScfOptions& opts,
                                        const std::optional<Eigen::MatrixXcd>& start) const {
    // the self-consistent problem is the projected problem on the full space
    // with occupation restricted to positive levels
    Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim(), dim());
    return projected_minimize(identity, n, kappa, opts, start);
}

double DiracFock::energy_difference(const OccupiedSet& phi, const Eigen::MatrixXcd& delta,
                                    double kappa) const {
    const int n = phi.n();
    const Eigen::MatrixXcd& f = phi.frame;
    // T = F^d D + D^d F + D^d D (small, Hermitian); M = (I+T)^-1; M-I = -T M
    Eigen::MatrixXcd t = f.adjoint() * delta + delta.adjoint() * f + delta.adjoint() * delta;
    Eigen::MatrixXcd m =
        (Eigen::MatrixXcd::Identity(n, n) + t).inverse();
    Eigen::MatrixXcd m_minus_i = -t * m;

    Eigen::MatrixXcd dd = f * m_minus_i * f.adjoint() + f * m * delta.adjoint() +
                          delta * m * f.adjoint() + delta * m * delta.adjoint();

    const Eigen::VectorXd lam = basis_->lambdas();
    double de = 0.0;
    for (int a = 0; a < dim(); ++a) de += lam(a) * dd(a, a).real();

    if (kappa != 0.0) {
        Eigen::MatrixXcd omega_dd = omega_matrix(dd);
        Eigen::MatrixXcd d0 = f * f.adjoint();
        const double g_d_dd = (d0 * omega_dd).trace().real();
        const double g_dd_dd = (dd * omega_dd).trace().real();
        de += kappa * g_d_dd + 0.5 * kappa * g_dd_dd;
    }
    return de;
}

FiberMaxReport DiracFock::fiber_max_check(const OccupiedSet& w, double kappa,
                                          const ScfOptions& opts) const {
    FiberMaxReport rep;
    auto mf = mean_field(w, kappa);

    // stationarity: the occupied orbitals must be eigenvectors of their own
    // mean field
    Eigen::MatrixXcd fw = mf.h * w.frame - w.frame * (w.frame.adjoint() * mf.h * w.frame);
    rep.gradient_norm = fw.colwise().norm().maxCoeff();
    rep.critical = rep.gradient_norm <= 10.0 * opts.tol * c() * c();
    if (!rep.critical) return rep;

    // negative directions of the mean field
    std::vector<int> neg;
    for (int i = 0; i < mf.eigs.size(); ++i)
        if (mf.eigs(i) < 0.0) neg.push_back(i);
    Eigen::MatrixXcd focc = w.frame.adjoint() * mf.h * w.frame;

    // linear block: per negative level chi_n the form is lambda_n I - F_occ
    double margin = -std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> occ_es(focc);
    const double eps_min = occ_es.eigenvalues().minCoeff();
    for (int idx : neg) margin = std::max(margin, mf.eigs(idx) - eps_min);

    // sampled bound on the quadratic two-electron correction
    double kterm = 0.0;
    if (kappa != 0.0 && !neg.empty()) {
        std::mt19937_64 rng(1234);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int trial = 0; trial < 4; ++trial) {
            Eigen::MatrixXcd delta = Eigen::MatrixXcd::Zero(dim(), w.n());
            for (int i = 0; i < w.n(); ++i) {
                Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim());
                for (int idx : neg) x += cplx(gauss(rng), gauss(rng)) * mf.vecs.col(idx);
                delta.col(i) = x;
            }
            const double nrm = delta.norm();
            delta /= nrm;
            // exact second difference minus the linear-block prediction
            const double scale = 1e-5;
            const double q_exact = energy_difference(w, scale * delta, kappa) / (scale * scale);
            double q_lin = 0.0;
            for (int i = 0; i < w.n(); ++i) {
                q_lin += (delta.col(i).adjoint() * mf.h * delta.col(i))(0).real();
                for (int jj = 0; jj < w.n(); ++jj)
                    q_lin -= (focc(i, jj) * (delta.col(jj).adjoint() * delta.col(i))(0)).real();
            }
            kterm = std::max(kterm, std::abs(q_exact - q_lin));
        }
    }
    rep.kappa_term_bound = 3.0 * kterm;
    rep.margin = margin;
    rep.negative_definite = margin + rep.kappa_term_bound < 0.0;
    return rep;
}

OccupiedSet DiracFock::rotate_occupied(const OccupiedSet& w, const RotationSU2& rot) const {
    return OccupiedSet{basis_->rotation_matrix(rot) * w.frame, w.provenance + "+rot"};
}

std::string ScfResult::trace_csv() const {
    std::ostringstream os;
    os.precision(15);
    os << "iter,energy,residual\n";
    for (const auto& row : trace) os << row.iter << "," << row.energy << "," << row.residual << "\n";
    return os.str();
}

double subspace_angle(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.adjoint() * b);
    const double smin = svd.singularValues().minCoeff();
    return std::acos(std::clamp(smin, -1.0, 1.0));
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& frame) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(frame);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(frame.rows(), frame.cols());
    // deterministic phases: make the R diagonal real positive
    Eigen::MatrixXcd r = qr.matrixQR().topRows(frame.cols()).triangularView<Eigen::Upper>();
    for (int i = 0; i < frame.cols(); ++i) {
        const cplx d = r(i, i);
        if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

} // namespace dflab
