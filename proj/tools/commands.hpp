#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wavestab/config.hpp"

namespace wavestab::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kStalled = 2,
    kPointFailed = 3,
    kVerifyFailed = 4,
};

// Records what a command read and wrote; merged into <out>/manifest.json.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& cfg);
    void input(const std::string& path);
    void output(const std::string& path);
    // Writes the manifest, keeping entries of other commands already present.
    void finish(int exit_code);

private:
    std::string command_;
    RunConfig cfg_;
    double started_;
    std::vector<std::string> inputs_, outputs_;
};

std::string sha256_file(const std::string& path);

// "all", "window", "index=3,7", "alpha=0.5,0.785". Alphas select the nearest point.
std::vector<int> parse_selection(const std::string& expr, const BranchRecord& branch);

// Per-point stability analysis as written into stability.json.
nlohmann::json analyze_point(const BranchRecord& branch, int index, const RunConfig& cfg, bool& failed);

int cmd_branch(const RunConfig& cfg);
int cmd_stability(const RunConfig& cfg, const std::string& branch_path, const std::string& selection);
int cmd_verify(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg, const std::optional<std::string>& branch_path,
               const std::optional<std::string>& stability_path);

}  // namespace wavestab::cli
