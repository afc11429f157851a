#include "dflab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dflab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F conv) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(conv(key, item));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

} // namespace

LabConfig::LabConfig() = default;

void LabConfig::set(const std::string& key, const std::string& value) {
    if (key == "nucleus.radius") nucleus_radius = to_double(key, value);
    else if (key == "nucleus.exponent") nucleus_exponent = to_int(key, value);
    else if (key == "grid.size") grid_size = to_int(key, value);
    else if (key == "grid.rbox") grid_rbox = to_double(key, value);
    else if (key == "grid.mapping.a") grid_mapping_a = to_double(key, value);
    else if (key == "grid.mapping.b") grid_mapping_b = to_double(key, value);
    else if (key == "grid.mapping.d") grid_mapping_d = to_double(key, value);
    else if (key == "dirac.c") dirac_c = to_double(key, value);
    else if (key == "dirac.kmax") dirac_kmax = to_int(key, value);
    else if (key == "dirac.basis_per_channel") dirac_basis_per_channel = to_int(key, value);
    else if (key == "dirac.cluster_tol") dirac_cluster_tol = to_double(key, value);
    else if (key == "dirac.max_shells") dirac_max_shells = to_int(key, value);
    else if (key == "dirac.n_positive") dirac_n_positive = to_int(key, value);
    else if (key == "dirac.n_negative") dirac_n_negative = to_int(key, value);
    else if (key == "scf.tol") scf_tol = to_double(key, value);
    else if (key == "scf.max_iter") scf_max_iter = to_int(key, value);
    else if (key == "scf.damping") scf_damping = to_double(key, value);
    else if (key == "scf.level_shift") scf_level_shift = to_double(key, value);
    else if (key == "game.n_starts") game_starts = to_int(key, value);
    else if (key == "game.max_iter") game_max_iter = to_int(key, value);
    else if (key == "experiment.n_list") n_list = to_list<int>(key, value, to_int);
    else if (key == "experiment.kappa_list") kappa_list = to_list<double>(key, value, to_double);
    else if (key == "experiment.c_list") c_list = to_list<double>(key, value, to_double);
    else if (key == "experiment.out") out_dir = value;
    else if (key == "experiment.seed") seed = static_cast<uint64_t>(to_int(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
}

LabConfig LabConfig::parse_text(const std::string& text) {
    LabConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

LabConfig LabConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str());
}

void LabConfig::validate() const {
    if (nucleus_radius <= 0.0) throw ConfigError("config: nucleus.radius must be positive");
    if (nucleus_exponent < 2) throw ConfigError("config: nucleus.exponent must be >= 2");
    if (grid_size < 64) throw ConfigError("config: grid.size must be >= 64");
    if (grid_rbox <= nucleus_radius) throw ConfigError("config: grid.rbox must exceed the nucleus");
    if (dirac_c <= 1.0) throw ConfigError("config: dirac.c must exceed 1");
    if (dirac_kmax < 1) throw ConfigError("config: dirac.kmax must be >= 1");
    if (dirac_n_positive < 1 || dirac_n_negative < 0)
        throw ConfigError("config: bad basis truncation");
    if (scf_tol <= 0 || scf_max_iter < 1) throw ConfigError("config: bad scf settings");
    for (int n : n_list)
        if (n < 0) throw ConfigError("config: experiment.n_list entries must be >= 0");
    for (double k : kappa_list)
        if (k < 0) throw ConfigError("config: experiment.kappa_list entries must be >= 0");
    if (dirac_basis_per_channel > 0) {
        // spline count is fixed by the grid; a stated value must agree
        const int derived = grid_size - 1 + 7 - 3;
        if (dirac_basis_per_channel != derived)
            throw ConfigError("config: dirac.basis_per_channel is " +
                              std::to_string(dirac_basis_per_channel) + " but the grid gives " +
                              std::to_string(derived));
    }
}

std::string LabConfig::snapshot() const {
    std::ostringstream os;
    os.precision(17);
    os << "dirac.basis_per_channel = " << (grid_size - 1 + 7 - 3) << "\n";
    os << "dirac.c = " << dirac_c << "\n";
    os << "dirac.cluster_tol = " << cluster_tol() << "\n";
    os << "dirac.kmax = " << dirac_kmax << "\n";
    os << "dirac.max_shells = " << dirac_max_shells << "\n";
    os << "dirac.n_negative = " << dirac_n_negative << "\n";
    os << "dirac.n_positive = " << dirac_n_positive << "\n";
    os << "experiment.c_list =";
    for (size_t i = 0; i < c_list.size(); ++i) os << (i ? "," : " ") << c_list[i];
    os << "\n";
    os << "experiment.kappa_list =";
    for (size_t i = 0; i < kappa_list.size(); ++i) os << (i ? "," : " ") << kappa_list[i];
    os << "\n";
    os << "experiment.n_list =";
    for (size_t i = 0; i < n_list.size(); ++i) os << (i ? "," : " ") << n_list[i];
    os << "\n";
    os << "experiment.out = " << out_dir << "\n";
    os << "experiment.seed = " << seed << "\n";
    os << "game.max_iter = " << game_max_iter << "\n";
    os << "game.n_starts = " << game_starts << "\n";
    os << "grid.mapping.a = " << grid_mapping_a << "\n";
    os << "grid.mapping.b = " << grid_mapping_b << "\n";
    os << "grid.mapping.d = " << grid_mapping_d << "\n";
    os << "grid.rbox = " << grid_rbox << "\n";
    os << "grid.size = " << grid_size << "\n";
    os << "nucleus.exponent = " << nucleus_exponent << "\n";
    os << "nucleus.radius = " << nucleus_radius << "\n";
    os << "scf.damping = " << scf_damping << "\n";
    os << "scf.level_shift = " << scf_level_shift << "\n";
    os << "scf.max_iter = " << scf_max_iter << "\n";
    os << "scf.tol = " << scf_tol << "\n";
    return os.str();
}

uint64_t LabConfig::hash() const {
    const std::string s = snapshot();
    uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace dflab
