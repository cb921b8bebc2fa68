#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace garsamp {

struct VerifyOptions {
    std::size_t grid_points = 10000;
    // Sampling checks (fixed RS and GARS runs) on top of the static ones.
    bool sampling = true;
    std::size_t samples = 300;
    std::uint64_t seed = 1;
};

struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool pass() const;
    nlohmann::json to_json() const;
};

// Runs the model invariants against a config document. Failures, including
// a config that does not load, become report entries.
VerifyReport verify_suite(const nlohmann::json& doc, const VerifyOptions& opt = {});

}  // namespace garsamp
