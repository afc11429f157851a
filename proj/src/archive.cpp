#include "dflab/archive.hpp"

#include <filesystem>
#include <fstream>

namespace dflab {

RunArchive::RunArchive(const std::string& root, const std::string& run_name,
                       const LabConfig& cfg) {
    namespace fs = std::filesystem;
    dir_ = (fs::path(root) / run_name).string();
    fs::create_directories(dir_);
    write("config.txt", cfg.snapshot());
    write("version.txt", std::string(kVersionStamp) + "\n");
}

void RunArchive::write(const std::string& name, const std::string& content) const {
    namespace fs = std::filesystem;
    const auto path = fs::path(dir_) / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("archive: cannot write " + path.string());
    os << content;
}

} // namespace dflab
