#pragma once

#include "opplab/linalg.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <vector>

namespace opplab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;  // one line
    nlohmann::json data;  // per-experiment rows and numbers
    double seconds = 0;
};

struct BatterySummary {
    std::vector<CriterionResult> results;
    nlohmann::json config;  // resolved
    bool all_pass() const;
    // timings are left out so that reruns are byte-identical
    nlohmann::json to_json() const;
};

// The shipped battery: one experiment per acceptance criterion.
nlohmann::json default_battery_config();
// Validates the layout and fills every missing parameter from the defaults of the named
// experiment. Throws DomainError on a missing "experiments" list, a missing name or an unknown name.
nlohmann::json resolve_battery_config(const nlohmann::json& config);
std::vector<std::string> experiment_names();

// Runs one experiment with resolved parameters.
CriterionResult run_experiment(const nlohmann::json& experiment);
BatterySummary run_battery(const nlohmann::json& config,
                           const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace opplab
