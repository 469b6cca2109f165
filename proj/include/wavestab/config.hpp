#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "wavestab/branch.hpp"
#include "wavestab/stability.hpp"

namespace wavestab {

// Everything a command needs. JSON keys mirror the member names; see the
// README for the schema.
struct RunConfig {
    GridSpec grid{120.0, 4096, 1.0, 1.0};
    NewtonOptions newton;
    Dealias dealias = Dealias::two_thirds;
    double start_froude = 1.02;
    ContinuationTarget target;
    StepControl step;

    StabilityGridOptions stability_grid;
    GrowthSearchOptions growth;
    std::vector<double> spectrum_lambdas{1.0};  // per-point spectra, units of c/h
    int k_lambda_count = 7;
    double dc_floor = 1e-3;  // |dc/ds| below which the moving-kernel block is skipped

    std::string out_dir = "out";
    int workers = 1;
    std::uint64_t seed = 20240601;

    // Test hook: flips the sign of P_ey before any operator is assembled.
    bool flip_P_ey_sign = false;

    // Throws ConfigError with the first violated rule.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::string& path);

}  // namespace wavestab
