#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spdeito/report.hpp"
#include "spdeito/scenario_config.hpp"

namespace spdeito {

struct SuiteOptions {
    /// Worker cap for scenario- and path-level parallelism; results do not depend on it.
    std::size_t workers = 1;
};

struct SuiteResult {
    Report report;
    /// Extra outputs keyed by file name (tables, fits, breakdowns).
    std::map<std::string, std::string> artifacts;
};

/// kernel-selftest, verify-ito, verify-pathwise, verify-zambotti, renorm-study, hida-norm.
const std::vector<std::string>& suite_names();
std::string suite_description(std::string_view name);

/// Runs one suite. Numerical resolution failures propagate as ResolutionError.
SuiteResult run_suite(std::string_view name, const ScenarioConfig& config, const SuiteOptions& options = {});

}  // namespace spdeito
