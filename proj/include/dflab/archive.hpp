#pragma once

#include "dflab/config.hpp"

#include <string>

namespace dflab {

inline constexpr const char* kVersionStamp = "dflab 0.1.0";

/// Per-run output directory: config snapshot, version stamp, and any number
/// of named text artifacts (tables are comma-separated with a header row).
class RunArchive {
  public:
    RunArchive(const std::string& root, const std::string& run_name, const LabConfig& cfg);

    const std::string& dir() const { return dir_; }
    void write(const std::string& name, const std::string& content) const;

  private:
    std::string dir_;
};

} // namespace dflab
