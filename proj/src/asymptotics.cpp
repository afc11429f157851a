#include "dflab/asymptotics.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dflab {

PauliOrbital make_pauli_orbital(const RadialGrid& grid, const RadialOrbital& schro, int kappa,
                                int tm) {
    PauliOrbital out;
    out.mu = schro.lambda;
    out.kappa = kappa;
    out.tm = tm;
    auto sh = spinor_harmonic(kappa, tm);
    out.l = sh.l;
    out.u = schro.p;
    out.du = schro.dp;
    out.phi = SpinorSH(&grid, sh.l);
    const int np = grid.n_points();
    Eigen::VectorXcd up(np), dn(np);
    for (int g = 0; g < np; ++g) {
        const double v = schro.p[g] / grid.points()[g];
        up(g) = sh.coeff_up * v;
        dn(g) = sh.coeff_dn * v;
    }
    const int mup = (tm - 1) / 2, mdn = (tm + 1) / 2;
    if (std::abs(mup) <= sh.l && sh.coeff_up != 0.0) out.phi.spin(0).at(sh.l, mup) = up;
    if (std::abs(mdn) <= sh.l && sh.coeff_dn != 0.0) out.phi.spin(1).at(sh.l, mdn) = dn;
    return out;
}

Eigen::Matrix4cd dirac_beta() {
    Eigen::Matrix4cd b = Eigen::Matrix4cd::Zero();
    b(0, 0) = b(1, 1) = 1.0;
    b(2, 2) = b(3, 3) = -1.0;
    return b;
}

Eigen::Matrix4cd dirac_alpha_dot(const Eigen::Vector3d& p) {
    const cplx i(0, 1);
    Eigen::Matrix2cd sp;
    sp << p.z(), cplx(p.x(), -p.y()), cplx(p.x(), p.y()), -p.z();
    Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
    a.block<2, 2>(0, 2) = sp;
    a.block<2, 2>(2, 0) = sp;
    return a;
}

namespace {

// adaptive Simpson for matrix integrands
using MatFn = std::function<Eigen::Matrix4cd(double)>;

Eigen::Matrix4cd simpson_mat(const MatFn& f, double a, double b, const Eigen::Matrix4cd& fa,
                             const Eigen::Matrix4cd& fm, const Eigen::Matrix4cd& fb, double tol,
                             int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Eigen::Matrix4cd flm = f(lm), frm = f(rm);
    const Eigen::Matrix4cd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const Eigen::Matrix4cd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Eigen::Matrix4cd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || (left + right - whole).norm() < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_mat(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           simpson_mat(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

} // namespace

ResolventAverage resolvent_average(const Eigen::Vector3d& p, double c) {
    ResolventAverage out;
    const Eigen::Matrix4cd m1 = dirac_beta() + dirac_alpha_dot(p) / c;
    const cplx i(0, 1);

    // closed form via the residue of the upper half plane pole
    const double omega = std::sqrt(1.0 + p.squaredNorm() / (c * c));
    const Eigen::Matrix4cd lam_minus =
        (omega * Eigen::Matrix4cd::Identity() - m1) / (2.0 * omega);
    out.closed_form = -2.0 * M_PI * lam_minus / (1.0 + omega);

    // quadrature over u = tan(s); the integrand extends continuously to the
    // endpoints where it equals -identity
    auto integrand = [&](double s) -> Eigen::Matrix4cd {
        const double cs = std::cos(s);
        if (std::abs(cs) < 1e-14) return -Eigen::Matrix4cd::Identity();
        const double u = std::tan(s);
        const double sec2 = 1.0 / (cs * cs);
        Eigen::Matrix4cd r1 = (-i * u * Eigen::Matrix4cd::Identity() + m1).inverse();
        const cplx r2 = 1.0 / cplx(1.0, -u);
        return sec2 * r2 * r1;
    };
    const double a = -M_PI / 2, b = M_PI / 2, mid = 0.0;
    out.quadrature =
        simpson_mat(integrand, a, b, integrand(a), integrand(mid), integrand(b), 1e-12, 30);
    return out;
}

PairingReport pair_orbital(const RadialBasis& basis, const Potential& v, double c, int kappa,
                           int state_index) {
    PairingReport rep;
    rep.c = c;
    Channel ch{kappa};
    auto dirac = solve_channel(ch, c, v, basis);
    auto gap = dirac.gap();
    if (state_index >= static_cast<int>(gap.size()))
        throw std::invalid_argument("pair_orbital: no such gap state");
    auto schro = schrodinger_channel(ch.l_large(), v, basis);
    if (state_index >= static_cast<int>(schro.size()))
        throw std::runtime_error("pair_orbital: no nonrelativistic partner");

    const auto& grid = basis.grid();
    const auto& ex = *gap[state_index];
    const auto& nr = schro[state_index];
    const int np = grid.n_points();

    // paired small component (1/2c)(u' + kappa u / r)
    std::vector<double> qkb(np), dlarge(np), dsmall(np), prod(np), small2(np);
    for (int g = 0; g < np; ++g) {
        const double r = grid.points()[g];
        qkb[g] = (0.5 / c) * (nr.dp[g] + kappa * nr.p[g] / r);
        dlarge[g] = (ex.p[g] - nr.p[g]) * (ex.p[g] - nr.p[g]);
        dsmall[g] = (ex.q[g] - qkb[g]) * (ex.q[g] - qkb[g]);
        prod[g] = ex.p[g] * nr.p[g];
        small2[g] = ex.q[g] * ex.q[g];
    }
    rep.error_norm = std::sqrt(grid.integrate(dlarge) + grid.integrate(dsmall));
    rep.large_overlap = grid.integrate(prod);
    const double qnorm = std::sqrt(grid.integrate(small2));
    rep.small_rel_error = std::sqrt(grid.integrate(dsmall)) / std::max(qnorm, 1e-300);
    return rep;
}

FField f_field_expansion(const SpinorSH& phi, const RotationSU2& a) {
    FField out;
    // densities carry up to twice the orbital rank; products two more
    int lphi = 0;
    for (int s = 0; s < 2; ++s)
        for (auto [l, m] : phi.spin(s).components()) lphi = std::max(lphi, l);
    const int lmax_prod = 2 * lphi + 2;
    SpinorSH rphi = phi.rotate(a);

    ScalarSH rho1 = density_product(rphi, rphi, 2 * lphi, &out.tail_norm);
    ScalarSH rho2 = density_product(rphi, phi, 2 * lphi, &out.tail_norm);

    VectorSH w1 = field_convolution(rho1);
    VectorSH w2 = field_convolution(rho2);

    SpinorSH t1 = sigma_dot_vector(w1, phi, lmax_prod, &out.tail_norm);
    SpinorSH t2 = sigma_dot_vector(w2, rphi, lmax_prod, &out.tail_norm);
    t2 *= cplx(-1.0);
    t1 += t2;
    out.f = std::move(t1);
    return out;
}

FField f_field(const PauliOrbital& phi, const RotationSU2& a) { return f_field_expansion(phi.phi, a); }

Eigen::VectorXcd surface_integral_table(const PauliOrbital& phi, const SpinorSH& f) {
    SpinorSH xsig = sigma_dot_xhat(phi.phi);
    Eigen::VectorXcd s = surface_dot(xsig, f);
    const auto& grid = phi.phi.grid();
    for (int g = 0; g < grid.n_points(); ++g) s(g) *= grid.points()[g];
    return s;
}

double cauchy_schwarz_margin(const PauliOrbital& phi, const RotationSU2& a) {
    SpinorSH rphi = phi.phi.rotate(a);
    const double n2 = phi.phi.norm() * phi.phi.norm();
    const cplx overlap = SpinorSH::dot(rphi, phi.phi);
    return n2 - std::abs(overlap);
}

SpinorSH large_component_field(const OrbitalBasis& basis, const Eigen::VectorXcd& coeffs) {
    const auto& grid = basis.grid();
    int lmax = 0;
    for (int a = 0; a < basis.size(); ++a)
        lmax = std::max(lmax, Channel{basis.element(a).kappa}.l_large());
    SpinorSH out(&grid, lmax);
    const int np = grid.n_points();
    for (int a = 0; a < basis.size(); ++a) {
        const cplx ca = coeffs(a);
        if (std::abs(ca) < 1e-300) continue;
        const auto& el = basis.element(a);
        const auto sh = spinor_harmonic(el.kappa, el.tm);
        const auto& orb = basis.radial(el.radial_id);
        const int mup = (el.tm - 1) / 2, mdn = (el.tm + 1) / 2;
        if (sh.coeff_up != 0.0 && std::abs(mup) <= sh.l) {
            auto& t = out.spin(0).at(sh.l, mup);
            for (int g = 0; g < np; ++g) t(g) += ca * sh.coeff_up * orb.p[g] / grid.points()[g];
        }
        if (sh.coeff_dn != 0.0 && std::abs(mdn) <= sh.l) {
            auto& t = out.spin(1).at(sh.l, mdn);
            for (int g = 0; g < np; ++g) t(g) += ca * sh.coeff_dn * orb.p[g] / grid.points()[g];
        }
    }
    return out;
}

PropertyPCertificate property_p_certificate(const PauliOrbital& phi,
                                            const std::vector<RotationSU2>& candidates) {
    PropertyPCertificate cert;
    const auto& grid = phi.phi.grid();
    const int np = grid.n_points();

    // surface density and the tail window from its thresholds
    SpinorSH xphi = phi.phi; // surface density is spin-summed |phi|^2 per radius
    Eigen::VectorXcd sdens_c = surface_dot(xphi, xphi);
    Eigen::VectorXd sdens = sdens_c.real();
    const double peak = sdens.maxCoeff();
    int lo = -1, hi = -1;
    for (int g = 0; g < np; ++g) {
        const bool in_window = sdens(g) < 1e-3 * peak && sdens(g) > 1e-8 * peak &&
                               grid.points()[g] > 2.0; // outer tail only
        if (in_window && lo < 0) lo = g;
        if (in_window) hi = g;
    }
    if (lo < 0 || hi <= lo)
        throw std::runtime_error("property_p_certificate: no usable tail window");
    cert.window_lo = grid.points()[lo];
    cert.window_hi = grid.points()[hi];

    const double norm2 = phi.phi.norm() * phi.phi.norm();
    // noise floor: machine-scale model of the coefficient algebra in the window
    double floor = 0.0;
    for (int g = lo; g <= hi; ++g)
        floor = std::max(floor, 1e-13 * grid.points()[g] * sdens(g) * norm2);
    cert.noise_floor = floor;

    for (size_t ci = 0; ci < candidates.size(); ++ci) {
        auto ff = f_field(phi, candidates[ci]);
        auto itab = surface_integral_table(phi, ff.f);
        double sup = 0.0, delta_min = std::numeric_limits<double>::infinity();
        for (int g = lo; g <= hi; ++g) {
            const double val = std::abs(itab(g));
            sup = std::max(sup, val);
            delta_min = std::min(delta_min, val / (norm2 * sdens(g)));
        }
        if (sup > cert.sup_r_i) {
            cert.sup_r_i = sup;
            cert.winner = static_cast<int>(ci);
            cert.delta_fit = delta_min;
            cert.f_norm = ff.f.norm();
            cert.margin = cauchy_schwarz_margin(phi, candidates[ci]);
            std::ostringstream os;
            os.precision(15);
            os << "r,surface_density,abs_rI\n";
            for (int g = lo; g <= hi; ++g)
                os << grid.points()[g] << "," << sdens(g) << "," << std::abs(itab(g)) << "\n";
            cert.curves_csv = os.str();
        }
    }
    cert.verdict = cert.winner >= 0 && cert.sup_r_i >= 1e3 * cert.noise_floor && cert.margin > 0.0;
    return cert;
}

} // namespace dflab
