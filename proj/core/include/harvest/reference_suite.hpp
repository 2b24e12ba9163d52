#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "harvest/rng.hpp"

namespace harvest {

struct SuiteOptions {
    unsigned threads = 1;
    std::optional<std::size_t> paths;  // overrides every Monte Carlo path count
    std::optional<Seed> seed;          // overrides every base seed
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // one line, deterministic
    std::string csv;     // deterministic table backing the verdict
    double seconds = 0.0;
};

/// Built-in acceptance scenarios, numbered 1-8. Criterion 8 re-runs 2-4 with
/// 1 and 4 threads and compares their CSV output byte for byte.
CriterionResult run_criterion(int id, const SuiteOptions& opts);
std::vector<CriterionResult> run_reference_suite(const SuiteOptions& opts, const std::vector<int>& ids = {});

/// id,name,passed,detail
std::string suite_summary_csv(const std::vector<CriterionResult>& results);

}  // namespace harvest
