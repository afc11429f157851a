#include <doctest.h>

#include "dflab/nucleus.hpp"
#include "dflab/radial_dirac.hpp"

#include <cmath>

using namespace dflab;

namespace {

RadialBasis default_basis(int nodes = 81, double rbox = 40.0) {
    return RadialBasis(build_grid(nodes, rbox), 7);
}

const NuclearModel& default_nucleus() {
    static NuclearModel nuc = build_nuclear_model(0.5, 4);
    return nuc;
}

// analytic point-Coulomb Dirac level (unit effective charge)
double dirac_coulomb_level(double c, int n, int kappa) {
    const double alpha = 1.0 / c;
    const double gamma = std::sqrt(kappa * kappa - alpha * alpha);
    const double denom = n - std::abs(kappa) + gamma;
    return c * c / std::sqrt(1.0 + alpha * alpha / (denom * denom));
}

} // namespace

TEST_CASE("free dirac operator has the spectral gap (-c^2, c^2)") {
    auto basis = default_basis(65, 30.0);
    const double c = 100.0;
    auto spec = solve_channel(Channel{-1}, c, [](double) { return 0.0; }, basis);
    for (const auto& orb : spec.all)
        CHECK(std::abs(orb.lambda) >= c * c * (1.0 - 1e-8));
}

TEST_CASE("channel matrices symmetric, overlap positive") {
    auto basis = default_basis(65, 30.0);
    auto mats = channel_matrix(Channel{-1}, 100.0, default_nucleus().potential_fn(), basis);
    CHECK((mats.h - mats.h.transpose()).cwiseAbs().maxCoeff() < 1e-14 * mats.h.cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(mats.s);
    CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("smeared potential binds: lowest gap state") {
    auto basis = default_basis();
    const double c = 100.0;
    auto spec = solve_channel(Channel{-1}, c, default_nucleus().potential_fn(), basis);
    auto gap = spec.gap();
    REQUIRE(gap.size() >= 3);
    CHECK(gap[0]->lambda > 0.0);
    CHECK(gap[0]->lambda < c * c);
    // increasing toward c^2
    for (size_t i = 1; i < gap.size(); ++i) CHECK(gap[i]->lambda > gap[i - 1]->lambda);
    // orbital norm
    std::vector<double> dens(basis.grid().n_points());
    for (int g = 0; g < basis.grid().n_points(); ++g)
        dens[g] = gap[0]->p[g] * gap[0]->p[g] + gap[0]->q[g] * gap[0]->q[g];
    CHECK(std::abs(basis.grid().integrate(dens) - 1.0) < 1e-12);
    // no spurious states flagged for the default configuration
    for (const auto* o : gap) CHECK(!o->spurious);
}

TEST_CASE("nonrelativistic limit of the lowest level") {
    auto basis = default_basis();
    const auto vfn = default_nucleus().potential_fn();
    auto schro = schrodinger_channel(0, vfn, basis);
    const double mu1 = schro[0].lambda;
    const double c = 100.0;
    auto spec = solve_channel(Channel{-1}, c, vfn, basis);
    const double shift = spec.gap()[0]->lambda - c * c;
    CHECK(std::abs(shift - mu1) < 10.0 * std::abs(mu1) / (c * c));
}

TEST_CASE("schrodinger channel: hydrogen oracle and node counts") {
    auto basis = default_basis();
    auto hyd = schrodinger_channel(0, [](double r) { return -1.0 / r; }, basis);
    CHECK(std::abs(hyd[0].lambda + 0.5) < 1e-9);
    CHECK(std::abs(hyd[1].lambda + 0.125) < 1e-9);
    for (int k = 0; k < 4; ++k) CHECK(hyd[k].nodes == k);

    // smeared potential is weaker near the origin
    auto sm = schrodinger_channel(0, default_nucleus().potential_fn(), basis);
    CHECK(sm[0].lambda > -0.5);
}

TEST_CASE("variational stability under grid refinement") {
    const double c = 100.0;
    const auto vfn = default_nucleus().potential_fn();
    auto coarse = RadialBasis(build_grid(65, 40.0), 7);
    // ~doubling the node count refines the knot set (same mapping)
    auto fine = RadialBasis(build_grid(129, 40.0), 7);
    auto l1c = solve_channel(Channel{-1}, c, vfn, coarse).gap()[0]->lambda;
    auto l1f = solve_channel(Channel{-1}, c, vfn, fine).gap()[0]->lambda;
    CHECK(l1f <= l1c + 1e-10);
}

TEST_CASE("spectrum assembly: shell structure of the default configuration") {
    auto basis = default_basis();
    const double c = 100.0;
    auto channels = solve_channels(2, c, default_nucleus().potential_fn(), basis);
    auto table = assemble_spectrum(channels, c, 3e-12 * c * c, 8);

    REQUIRE(table.shells.size() == 8);
    // lowest shell: s_1/2 with dimension 2
    CHECK(table.shells[0].kappas == std::vector<int>{-1});
    CHECK(table.shells[0].dim == 2);
    // second shell p_1/2 (smearing lifts 2s above 2p), third p_3/2
    CHECK(table.shells[1].kappas == std::vector<int>{1});
    CHECK(table.shells[1].dim == 2);
    CHECK(table.shells[2].kappas == std::vector<int>{-2});
    CHECK(table.shells[2].dim == 4);

    for (const auto& sh : table.shells) {
        CHECK(sh.dim >= 2);
        CHECK(sh.dim % 2 == 0);
        int sum = 0;
        for (int kappa : sh.kappas) sum += 2 * std::abs(kappa);
        CHECK(sh.dim == sum);
    }

    auto csv = table.to_csv();
    CHECK(csv.find("shell,lambda") != std::string::npos);

    // a tolerance wide enough to blur fine structure must be refused rather
    // than silently merging shells
    CHECK_THROWS(assemble_spectrum(channels, c, 1e-7 * c * c, 8));
}

TEST_CASE("point-coulomb reference: analytic dirac levels and kappa degeneracy") {
    // R_n -> 0 test configuration: exact -1/r potential
    auto basis = RadialBasis(build_grid(121, 40.0, {.b = 6.0}), 7);
    const double c = 100.0;
    auto vfn = [](double r) { return -1.0 / r; };
    auto sm1 = solve_channel(Channel{-1}, c, vfn, basis);
    auto sp1 = solve_channel(Channel{1}, c, vfn, basis);
    auto sm2 = solve_channel(Channel{-2}, c, vfn, basis);

    const double e1s = dirac_coulomb_level(c, 1, -1);
    const double e2s = dirac_coulomb_level(c, 2, -1);
    const double e2p12 = dirac_coulomb_level(c, 2, 1);
    const double e2p32 = dirac_coulomb_level(c, 2, -2);

    CHECK(std::abs(sm1.gap()[0]->lambda - e1s) < 2e-6);
    CHECK(std::abs(sm1.gap()[1]->lambda - e2s) < 2e-6);
    CHECK(std::abs(sp1.gap()[0]->lambda - e2p12) < 2e-6);
    CHECK(std::abs(sm2.gap()[0]->lambda - e2p32) < 2e-6);

    // exact |kappa| degeneracy: 2s_1/2 with 2p_1/2
    CHECK(std::abs(sm1.gap()[1]->lambda - sp1.gap()[0]->lambda) < 2e-6);
}

TEST_CASE("nonrelativistic limit study: slope") {
    auto basis = default_basis();
    auto study =
        nonrel_limit_study({20.0, 40.0, 80.0}, default_nucleus().potential_fn(), basis, 1, 1);
    CHECK(study.slope_first_state > -2.6);
    CHECK(study.slope_first_state < -1.6);
    // error drops roughly 4x per doubling of c
    double e20 = 0, e40 = 0, e80 = 0;
    for (const auto& r : study.rows) {
        if (r.kappa != -1 || r.index != 0) continue;
        if (r.c == 20.0) e20 = r.error;
        if (r.c == 40.0) e40 = r.error;
        if (r.c == 80.0) e80 = r.error;
    }
    CHECK(e40 < e20 / 2.5);
    CHECK(e80 < e40 / 2.5);
    CHECK(study.to_csv().find("c,kappa") != std::string::npos);
}
