#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dflab {

/// Raised for malformed or inconsistent configuration input; the CLI maps it
/// to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat dotted-key configuration: `key = value` lines, `#` comments.
/// Unknown keys are rejected; every run starts from the documented defaults.
class LabConfig {
  public:
    LabConfig(); // defaults
    static LabConfig parse_file(const std::string& path);
    static LabConfig parse_text(const std::string& text);

    // nucleus
    double nucleus_radius = 0.5;
    int nucleus_exponent = 4;
    // grid
    int grid_size = 81;
    double grid_rbox = 40.0;
    double grid_mapping_a = 0.0; // 0 = derived from rbox
    double grid_mapping_b = 4.0;
    double grid_mapping_d = 0.0;
    // linear model
    double dirac_c = 100.0;
    int dirac_kmax = 2;
    int dirac_basis_per_channel = 0; // 0 = derived; validated otherwise
    double dirac_cluster_tol = 0.0;  // 0 = 3e-12 c^2
    int dirac_max_shells = 8;
    int dirac_n_positive = 10;
    int dirac_n_negative = 4;
    // scf
    double scf_tol = 1e-10;
    int scf_max_iter = 200;
    double scf_damping = 0.3;
    double scf_level_shift = 0.5;
    // games / experiments
    int game_starts = 5;
    int game_max_iter = 12;
    std::vector<int> n_list{2, 3};
    std::vector<double> kappa_list{0.0, 1e-3, 3e-3, 1e-2, 3e-2};
    std::vector<double> c_list{};
    std::string out_dir = "runs";
    uint64_t seed = 1;

    double cluster_tol() const {
        return dirac_cluster_tol > 0.0 ? dirac_cluster_tol : 3e-12 * dirac_c * dirac_c;
    }

    /// normalized key=value snapshot (stable ordering)
    std::string snapshot() const;
    /// FNV-1a hash of the snapshot, used to key binary caches
    uint64_t hash() const;

    void validate() const;

  private:
    void set(const std::string& key, const std::string& value);
};

} // namespace dflab
