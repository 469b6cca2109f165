#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "wavestab/config.hpp"

namespace wavestab {

struct InvariantResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// The invariant suite run by `wavestab verify`: operator identities on the
// configured grid, a mid-branch wave (alpha = 0.5) and its stability
// structure on the line grid, the flat state, and the KdV-scaling spectrum.
std::vector<InvariantResult> run_invariant_suite(const RunConfig& cfg);

nlohmann::json invariants_to_json(const std::vector<InvariantResult>& r);

}  // namespace wavestab
