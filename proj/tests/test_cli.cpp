#include <doctest.h>

#include "dflab/config.hpp"
#include "dflab/experiments.hpp"

#include <filesystem>
#include <fstream>

using namespace dflab;

namespace {

std::string fast_config_text() {
    return R"(
# small, fast laboratory configuration
grid.size = 65
grid.rbox = 30.0
dirac.kmax = 1
dirac.n_positive = 4
dirac.n_negative = 2
dirac.max_shells = 4
experiment.n_list = 2
experiment.kappa_list = 0,1e-2
experiment.out = /tmp/dflab_test_runs
game.n_starts = 2
game.max_iter = 6
)";
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing, defaults, validation") {
    auto cfg = LabConfig::parse_text(fast_config_text());
    CHECK(cfg.grid_size == 65);
    CHECK(cfg.dirac_kmax == 1);
    CHECK(cfg.kappa_list == std::vector<double>{0.0, 1e-2});
    CHECK(cfg.nucleus_radius == 0.5); // default survives

    CHECK_THROWS_AS(LabConfig::parse_text("bogus.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(LabConfig::parse_text("nucleus.radius = -1\n"), ConfigError);
    CHECK_THROWS_AS(LabConfig::parse_text("grid.rbox = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(LabConfig::parse_text("scf.tol\n"), ConfigError);
    CHECK_THROWS_AS(LabConfig::parse_text("dirac.basis_per_channel = 10\n"), ConfigError);

    // snapshot is normalized and hashing is stable
    auto cfg2 = LabConfig::parse_text(fast_config_text());
    CHECK(cfg.snapshot() == cfg2.snapshot());
    CHECK(cfg.hash() == cfg2.hash());
    auto cfg3 = LabConfig::parse_text("nucleus.radius = 0.4\n");
    CHECK(cfg.hash() != cfg3.hash());
}

TEST_CASE("spectrum and scf drivers write archives") {
    namespace fs = std::filesystem;
    auto cfg = LabConfig::parse_text(fast_config_text());
    fs::remove_all(cfg.out_dir);

    LabContext lab(cfg);
    cmd_spectrum(lab);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "spectrum" / "spectrum.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "spectrum" / "config.txt"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "spectrum" / "version.txt"));
    auto csv = slurp((fs::path(cfg.out_dir) / "spectrum" / "spectrum.csv").string());
    CHECK(csv.find("shell,lambda") != std::string::npos);

    cmd_scf(lab);
    auto summary = slurp((fs::path(cfg.out_dir) / "scf" / "summary.csv").string());
    CHECK(summary.find("n,kappa,converged") != std::string::npos);
    CHECK(summary.find("2,0,1,1,") != std::string::npos); // kappa=0 in one iteration

    // impossible occupation is a config error
    auto bad = cfg;
    bad.n_list = {500};
    LabContext lab_bad(bad);
    CHECK_THROWS_AS(cmd_scf(lab_bad), ConfigError);
}

TEST_CASE("determinism: identical config and seed reproduce the archive") {
    namespace fs = std::filesystem;
    auto cfg = LabConfig::parse_text(fast_config_text());
    cfg.out_dir = "/tmp/dflab_det_a";
    fs::remove_all(cfg.out_dir);
    LabContext lab_a(cfg);
    cmd_scf(lab_a);

    auto cfg_b = cfg;
    cfg_b.out_dir = "/tmp/dflab_det_b";
    fs::remove_all(cfg_b.out_dir);
    LabContext lab_b(cfg_b);
    cmd_scf(lab_b);

    CHECK(slurp("/tmp/dflab_det_a/scf/summary.csv") == slurp("/tmp/dflab_det_b/scf/summary.csv"));
}
