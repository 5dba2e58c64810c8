#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tmoe {

struct GradSuiteSection {
    std::string name;
    double max_rel = 0.0;
    std::string worst_param;
    double tolerance = 0.0;
    bool passed = false;
};

struct GradSuiteResult {
    std::vector<GradSuiteSection> sections;
    bool all_passed = true;
    double worst = 0.0;
};

// Finite-difference verification of every layer type (tolerance 1e-4) and of
// the three full streams on toy instances (tolerance 1e-3).
GradSuiteResult run_gradcheck_suite(uint64_t seed);

std::string gradsuite_report(const GradSuiteResult& result);

}  // namespace tmoe
