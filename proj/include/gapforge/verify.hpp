#pragma once

#include <string>
#include <vector>

namespace gapforge {

/// One verification criterion: a named invariant suite with a hard pass/fail
/// verdict. The CLI `verify` command and the acceptance test binary run the
/// same implementations.
struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int index);

/// Maps a suite name (fourier, hitting, subsample, lp, duals, gap, scaling,
/// bnb, ac, determinism, all) to criterion indices; empty when unknown.
std::vector<int> criteria_for_suite(const std::string& suite);

std::string criterion_name(int index);

} // namespace gapforge
