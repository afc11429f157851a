#include "dflab/sphfield.hpp"

#include <cmath>
#include <stdexcept>

namespace dflab {

namespace {
int slot(int l, int m) { return l * l + l + m; }
} // namespace

ScalarSH::ScalarSH(const RadialGrid* grid, int lmax) : grid_(grid), lmax_(lmax) {
    data_.resize((lmax + 1) * (lmax + 1));
}

bool ScalarSH::has(int l, int m) const {
    if (l > lmax_ || std::abs(m) > l) return false;
    return data_[slot(l, m)].size() > 0;
}

Eigen::VectorXcd& ScalarSH::at(int l, int m) {
    if (l > lmax_ || l < 0 || std::abs(m) > l)
        throw std::out_of_range("ScalarSH::at: component outside lmax");
    auto& v = data_[slot(l, m)];
    if (v.size() == 0) v = Eigen::VectorXcd::Zero(grid_->n_points());
    return v;
}

const Eigen::VectorXcd* ScalarSH::find(int l, int m) const {
    if (!has(l, m)) return nullptr;
    return &data_[slot(l, m)];
}

std::vector<std::pair<int, int>> ScalarSH::components() const {
    std::vector<std::pair<int, int>> out;
    for (int l = 0; l <= lmax_; ++l)
        for (int m = -l; m <= l; ++m)
            if (has(l, m)) out.push_back({l, m});
    return out;
}

cplx ScalarSH::eval_point(int g, double theta, double phi) const {
    cplx s = 0.0;
    for (auto [l, m] : components()) s += (*find(l, m))(g)*spherical_y(l, m, theta, phi);
    return s;
}

cplx ScalarSH::integral() const {
    // only the (0,0) component survives the angular integral
    const auto* f = find(0, 0);
    if (!f) return 0.0;
    cplx s = 0.0;
    for (int g = 0; g < grid_->n_points(); ++g) {
        const double r = grid_->points()[g];
        s += grid_->weights()[g] * r * r * (*f)(g);
    }
    return std::sqrt(4.0 * M_PI) * s;
}

double ScalarSH::norm() const {
    double s = 0.0;
    for (auto [l, m] : components()) {
        const auto& f = *find(l, m);
        for (int g = 0; g < grid_->n_points(); ++g) {
            const double r = grid_->points()[g];
            s += grid_->weights()[g] * r * r * std::norm(f(g));
        }
    }
    return std::sqrt(s);
}

ScalarSH ScalarSH::conjugate() const {
    ScalarSH out(grid_, lmax_);
    for (auto [l, m] : components()) {
        // conj(Y_lm) = (-1)^m Y_{l,-m}
        const double sign = (m % 2) ? -1.0 : 1.0;
        out.at(l, -m) += sign * find(l, m)->conjugate();
    }
    return out;
}

ScalarSH& ScalarSH::operator+=(const ScalarSH& other) {
    for (auto [l, m] : other.components()) at(l, m) += *other.find(l, m);
    return *this;
}

ScalarSH& ScalarSH::operator*=(double s) {
    for (auto [l, m] : components()) at(l, m) *= s;
    return *this;
}

SpinorSH::SpinorSH(const RadialGrid* grid, int lmax) : comp_{ScalarSH(grid, lmax), ScalarSH(grid, lmax)} {}

SpinorSH SpinorSH::rotate(const RotationSU2& a) const {
    const int lm = lmax();
    SpinorSH out(&grid(), lm);
    // spatial part: coefficient vectors per l transform by the wigner block
    // (index i = l - m, decreasing m); spin part mixes by A itself
    for (int l = 0; l <= lm; ++l) {
        Eigen::MatrixXcd d = wigner_block(2 * l, a);
        for (int s = 0; s < 2; ++s) {
            for (int mp = -l; mp <= l; ++mp) {
                Eigen::VectorXcd acc;
                bool any = false;
                for (int m = -l; m <= l; ++m) {
                    const auto* src = comp_[s].find(l, m);
                    if (!src) continue;
                    const cplx coef = d(l - mp, l - m);
                    if (std::abs(coef) < 1e-300) continue;
                    if (!any) {
                        acc = coef * (*src);
                        any = true;
                    } else {
                        acc += coef * (*src);
                    }
                }
                if (any) out.comp_[s].at(l, mp) += acc;
            }
        }
    }
    // spin mixing
    SpinorSH mixed(&grid(), lm);
    for (int sp = 0; sp < 2; ++sp)
        for (int s = 0; s < 2; ++s) {
            const cplx aa = a.m(sp, s);
            if (std::abs(aa) < 1e-300) continue;
            for (auto [l, m] : out.comp_[s].components()) {
                mixed.comp_[sp].at(l, m) += aa * (*out.comp_[s].find(l, m));
            }
        }
    return mixed;
}

Eigen::Vector2cd SpinorSH::eval_point(int g, double theta, double phi) const {
    return {comp_[0].eval_point(g, theta, phi), comp_[1].eval_point(g, theta, phi)};
}

double SpinorSH::norm() const {
    return std::sqrt(comp_[0].norm() * comp_[0].norm() + comp_[1].norm() * comp_[1].norm());
}

cplx SpinorSH::dot(const SpinorSH& a, const SpinorSH& b) {
    cplx s = 0.0;
    for (int sp = 0; sp < 2; ++sp) {
        for (auto [l, m] : a.comp_[sp].components()) {
            const auto* fb = b.comp_[sp].find(l, m);
            if (!fb) continue;
            const auto& fa = *a.comp_[sp].find(l, m);
            const auto& g = a.grid();
            for (int i = 0; i < g.n_points(); ++i) {
                const double r = g.points()[i];
                s += g.weights()[i] * r * r * std::conj(fa(i)) * (*fb)(i);
            }
        }
    }
    return s;
}

SpinorSH& SpinorSH::operator+=(const SpinorSH& other) {
    comp_[0] += other.comp_[0];
    comp_[1] += other.comp_[1];
    return *this;
}

SpinorSH& SpinorSH::operator-=(const SpinorSH& other) {
    SpinorSH neg = other;
    neg *= cplx(-1.0);
    return *this += neg;
}

SpinorSH& SpinorSH::operator*=(cplx s) {
    for (int sp = 0; sp < 2; ++sp)
        for (auto [l, m] : comp_[sp].components()) comp_[sp].at(l, m) *= cplx(1.0) * s;
    return *this;
}

Eigen::Vector3cd VectorSH::eval_point_cartesian(int g, double theta, double phi) const {
    const cplx wp = comp[0].eval_point(g, theta, phi);
    const cplx w0 = comp[1].eval_point(g, theta, phi);
    const cplx wm = comp[2].eval_point(g, theta, phi);
    // V_{+1} = -(Vx + i Vy)/sqrt2, V_{-1} = (Vx - i Vy)/sqrt2
    const cplx vx = (wm - wp) / std::sqrt(2.0);
    const cplx vy = cplx(0, 1) * (wm + wp) / std::sqrt(2.0);
    return {vx, vy, w0};
}

double y_product_coeff(int l1, int m1, int l2, int m2, int L) {
    const int M = m1 + m2;
    if (std::abs(M) > L) return 0.0;
    const double w0 = three_j(2 * l1, 2 * l2, 2 * L, 0, 0, 0);
    if (w0 == 0.0) return 0.0;
    const double wm = three_j(2 * l1, 2 * l2, 2 * L, 2 * m1, 2 * m2, -2 * M);
    if (wm == 0.0) return 0.0;
    double val = std::sqrt((2.0 * l1 + 1) * (2.0 * l2 + 1) * (2.0 * L + 1) / (4.0 * M_PI)) * w0 * wm;
    if (M % 2) val = -val;
    return val;
}

ScalarSH density_product(const SpinorSH& a, const SpinorSH& b, int lmax_out, double* tail_norm) {
    ScalarSH out(&a.grid(), lmax_out);
    double tail = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (auto [l1, m1] : a.spin(s).components()) {
            const auto& fa = *a.spin(s).find(l1, m1);
            for (auto [l2, m2] : b.spin(s).components()) {
                const auto& fb = *b.spin(s).find(l2, m2);
                // conj(f Y_{l1 m1}) = conj(f) (-1)^{m1} Y_{l1,-m1}
                Eigen::VectorXcd rad = fa.conjugate().cwiseProduct(fb);
                if (m1 % 2) rad = -rad;
                const int M = m2 - m1;
                for (int L = std::abs(l1 - l2); L <= l1 + l2; L += 2) {
                    const double coef = y_product_coeff(l1, -m1, l2, m2, L);
                    if (coef == 0.0) continue;
                    if (L > lmax_out) {
                        double nr = 0.0;
                        const auto& g = a.grid();
                        for (int i = 0; i < g.n_points(); ++i)
                            nr += g.weights()[i] * g.points()[i] * g.points()[i] *
                                  std::norm(coef * rad(i));
                        tail += nr;
                        continue;
                    }
                    out.at(L, M) += coef * rad;
                }
            }
        }
    }
    if (tail_norm) *tail_norm += std::sqrt(tail);
    return out;
}

SpinorSH scalar_times_spinor(const ScalarSH& f, const SpinorSH& phi, int lmax_out,
                             double* tail_norm) {
    SpinorSH out(&phi.grid(), lmax_out);
    double tail = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (auto [l1, m1] : f.components()) {
            const auto& ff = *f.find(l1, m1);
            for (auto [l2, m2] : phi.spin(s).components()) {
                const auto& fp = *phi.spin(s).find(l2, m2);
                Eigen::VectorXcd rad = ff.cwiseProduct(fp);
                const int M = m1 + m2;
                for (int L = std::abs(l1 - l2); L <= l1 + l2; L += 2) {
                    if (std::abs(M) > L) continue;
                    const double coef = y_product_coeff(l1, m1, l2, m2, L);
                    if (coef == 0.0) continue;
                    if (L > lmax_out) {
                        double nr = 0.0;
                        const auto& g = phi.grid();
                        for (int i = 0; i < g.n_points(); ++i)
                            nr += g.weights()[i] * g.points()[i] * g.points()[i] *
                                  std::norm(coef * rad(i));
                        tail += nr;
                        continue;
                    }
                    out.spin(s).at(L, M) += coef * rad;
                }
            }
        }
    }
    if (tail_norm) *tail_norm += std::sqrt(tail);
    return out;
}

SpinorSH sigma_dot_vector(const VectorSH& w, const SpinorSH& phi, int lmax_out,
                          double* tail_norm) {
    // w.sigma = w_0 sigma_0 - w_{+1} sigma_{-1} - w_{-1} sigma_{+1}
    // sigma_{+1} = -sqrt2 [[0,1],[0,0]], sigma_{-1} = sqrt2 [[0,0],[1,0]]
    const double s2 = std::sqrt(2.0);
    SpinorSH out(&phi.grid(), lmax_out);

    auto add = [&](const ScalarSH& f, const SpinorSH& sp, cplx scale) {
        if (f.components().empty()) return;
        SpinorSH term = scalar_times_spinor(f, sp, lmax_out, tail_norm);
        term *= scale;
        out += term;
    };

    // build spin-mapped versions of phi once
    SpinorSH up_from_dn(&phi.grid(), phi.lmax());   // [[0,1],[0,0]] phi
    SpinorSH dn_from_up(&phi.grid(), phi.lmax());   // [[0,0],[1,0]] phi
    SpinorSH diag(&phi.grid(), phi.lmax());         // sigma_z phi
    for (auto [l, m] : phi.spin(1).components()) up_from_dn.spin(0).at(l, m) = *phi.spin(1).find(l, m);
    for (auto [l, m] : phi.spin(0).components()) dn_from_up.spin(1).at(l, m) = *phi.spin(0).find(l, m);
    for (auto [l, m] : phi.spin(0).components()) diag.spin(0).at(l, m) = *phi.spin(0).find(l, m);
    for (auto [l, m] : phi.spin(1).components()) diag.spin(1).at(l, m) = -(*phi.spin(1).find(l, m));

    add(w.nu(0), diag, 1.0);
    add(w.nu(+1), dn_from_up, -s2);  // -w_{+1} sigma_{-1}
    add(w.nu(-1), up_from_dn, +s2);  // -w_{-1} sigma_{+1} = -(-sqrt2)[[0,1],[0,0]]
    return out;
}

SpinorSH sigma_dot_xhat(const SpinorSH& phi) {
    VectorSH xhat;
    for (int v : {+1, 0, -1}) {
        ScalarSH comp(&phi.grid(), 1);
        comp.at(1, v) = Eigen::VectorXcd::Constant(phi.grid().n_points(),
                                                   std::sqrt(4.0 * M_PI / 3.0));
        xhat.nu(v) = std::move(comp);
    }
    return sigma_dot_vector(xhat, phi, phi.lmax() + 1, nullptr);
}

PotentialSH hartree_potential(const ScalarSH& density) {
    const auto& g = density.grid();
    PotentialSH out{ScalarSH(&g, density.lmax()), ScalarSH(&g, density.lmax())};
    std::vector<double> tre(g.n_points()), tim(g.n_points());
    for (auto [l, m] : density.components()) {
        const auto& d = *density.find(l, m);
        for (int i = 0; i < g.n_points(); ++i) {
            const double r2 = g.points()[i] * g.points()[i];
            tre[i] = d(i).real() * r2;
            tim[i] = d(i).imag() * r2;
        }
        auto pre = multipole_potential(g, tre, l);
        auto pim = multipole_potential(g, tim, l);
        auto& u = out.u.at(l, m);
        auto& du = out.du.at(l, m);
        const double pref = 4.0 * M_PI / (2.0 * l + 1.0);
        for (int i = 0; i < g.n_points(); ++i) {
            u(i) = pref * cplx(pre.u[i], pim.u[i]);
            du(i) = pref * cplx(pre.du[i], pim.du[i]);
        }
    }
    return out;
}

VectorSH gradient_field(const PotentialSH& pot) {
    const auto& g = pot.u.grid();
    const int lmax_out = pot.u.lmax() + 1;
    VectorSH w;
    for (int v : {+1, 0, -1}) w.nu(v) = ScalarSH(&g, lmax_out);

    const double pref = std::sqrt(4.0 * M_PI / 3.0);
    for (auto [l, m] : pot.u.components()) {
        const auto& u = *pot.u.find(l, m);
        const auto& du = *pot.du.find(l, m);
        Eigen::VectorXcd dplus(g.n_points()), dminus(g.n_points());
        for (int i = 0; i < g.n_points(); ++i) {
            const double r = g.points()[i];
            dplus(i) = du(i) - static_cast<double>(l) * u(i) / r;
            dminus(i) = du(i) + static_cast<double>(l + 1) * u(i) / r;
        }
        for (int v : {+1, 0, -1}) {
            // gradient ladder coefficients come from the C^1_v product expansion
            if (std::abs(m + v) <= l + 1) {
                const double cp = pref * y_product_coeff(1, v, l, m, l + 1);
                if (cp != 0.0) w.nu(v).at(l + 1, m + v) += cp * dplus;
            }
            if (l >= 1 && std::abs(m + v) <= l - 1) {
                const double cm = pref * y_product_coeff(1, v, l, m, l - 1);
                if (cm != 0.0) w.nu(v).at(l - 1, m + v) += cm * dminus;
            }
        }
    }
    return w;
}

VectorSH field_convolution(const ScalarSH& density) {
    VectorSH w = gradient_field(hartree_potential(density));
    for (auto& comp : w.comp)
        for (auto [l, m] : comp.components()) comp.at(l, m) *= -1.0;
    return w;
}

Eigen::VectorXcd surface_dot(const SpinorSH& a, const SpinorSH& b) {
    const auto& g = a.grid();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g.n_points());
    for (int s = 0; s < 2; ++s)
        for (auto [l, m] : a.spin(s).components()) {
            const auto* fb = b.spin(s).find(l, m);
            if (!fb) continue;
            out += a.spin(s).find(l, m)->conjugate().cwiseProduct(*fb);
        }
    return out;
}

} // namespace dflab
