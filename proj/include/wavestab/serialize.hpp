#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "wavestab/branch.hpp"
#include "wavestab/stability.hpp"

namespace wavestab {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kBranchCsvVersion = 1;

// Round-trip formatting (17 significant digits).
std::string fmt17(double x);

// One row per branch point; the first line is a version comment.
void write_branch_csv(std::ostream& os, const BranchRecord& branch);
std::vector<std::string> branch_csv_columns();

// Waves are stored as cosine coefficients, trimmed below 1e-17 of the largest.
nlohmann::json branch_to_json(const BranchRecord& branch);
// Throws ConfigError on malformed input.
BranchRecord branch_from_json(const nlohmann::json& j);

nlohmann::json extremum_to_json(const Extremum& e);
nlohmann::json report_to_json(const StabilityReport& r);
nlohmann::json moving_kernel_to_json(const MovingKernel& m);
nlohmann::json growing_mode_to_json(const GrowingMode& g);
nlohmann::json transition_to_json(const TransitionReport& t);

// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wavestab
