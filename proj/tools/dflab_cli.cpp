#include "dflab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

namespace {

int run(const std::string& sub, const std::string& config_path, const std::string& out_override,
        long seed_override) {
    using namespace dflab;
    try {
        LabConfig cfg =
            config_path.empty() ? LabConfig() : LabConfig::parse_file(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
        cfg.validate();

        LabContext lab(cfg);
        if (sub == "spectrum") cmd_spectrum(lab);
        else if (sub == "scf") cmd_scf(lab);
        else if (sub == "conjecture-m") cmd_conjecture_m(lab);
        else if (sub == "property-p") cmd_property_p(lab);
        else cmd_all(lab);
        std::printf("%s: ok (archive under %s)\n", sub.c_str(), cfg.out_dir.c_str());
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac-Fock variational laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long seed = -1;

    std::string chosen;
    for (const char* name : {"spectrum", "scf", "conjecture-m", "property-p", "all"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file (key = value lines)");
        sub->add_option("--out", out_dir, "output directory (overrides experiment.out)");
        sub->add_option("--seed", seed, "random seed (overrides experiment.seed)");
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return run(chosen, config_path, out_dir, seed);
}
