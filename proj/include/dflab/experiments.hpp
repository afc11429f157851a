#pragma once

#include "dflab/archive.hpp"
#include "dflab/asymptotics.hpp"
#include "dflab/config.hpp"
#include "dflab/games.hpp"
#include "dflab/nucleus.hpp"

#include <memory>

namespace dflab {

/// Everything the experiment drivers share, built once from a config.
struct LabContext {
    LabConfig cfg;
    NuclearModel nucleus;
    RadialBasis radial;
    std::shared_ptr<const OrbitalBasis> orbitals; // lazy

    explicit LabContext(const LabConfig& c);
    const OrbitalBasis& ensure_orbitals();
    ScfOptions scf_options() const;
    GameOptions game_options() const;
};

/// Experiment drivers behind the CLI subcommands. Each writes one archive
/// directory under cfg.out_dir and throws on failure (ConfigError for
/// configuration problems, anything else is a numerical failure).
void cmd_spectrum(LabContext& lab);
void cmd_scf(LabContext& lab);
void cmd_conjecture_m(LabContext& lab);
void cmd_property_p(LabContext& lab);
void cmd_all(LabContext& lab);

} // namespace dflab
