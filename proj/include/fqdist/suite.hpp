#pragma once

#include <string>
#include <vector>

#include "fqdist/harness.hpp"

namespace fqdist {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    u64 instances = 0;
    u64 failures = 0;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the full verification battery (criteria 1..10) and writes
/// results.csv and kappa_emp.csv under out_dir. Output bytes depend only on
/// the seed. Wall-clock limits are part of each criterion's pass flag.
std::vector<CriterionResult> run_paper_suite(u64 seed, const std::string& out_dir);

} // namespace fqdist
