#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lsmvos::check {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// conv2d against the nested-loop oracle on random shapes; max |Δ| < 1e-5.
CheckResult check_conv2d_oracle(std::size_t draws, std::uint64_t seed);

/// short_term_match against the per-pixel oracle over C ∈ {8,16},
/// H,W ∈ [8,16], k ∈ [0,3], n ∈ [1,(2k+1)²]; max |Δ| < 1e-5.
CheckResult check_short_term_oracle(std::size_t instances, std::uint64_t seed);

/// long_term_match against the all-pairs oracle, reference extents drawn
/// independently of the current extents; max |Δ| < 1e-5.
CheckResult check_long_term_oracle(std::size_t instances, std::uint64_t seed);

/// short_term_match with k covering a 12×12 map and gate ≡ 1 equals
/// long_term_match with ref = prev, bit for bit, for both polarities.
CheckResult check_window_global_consistency(std::uint64_t seed);

/// Analytic backward vs central differences (h = 1e-3) on `coords`
/// coordinates whose top-n selection is stable under the perturbation;
/// relative error < 1e-3.
CheckResult check_short_term_gradient(std::size_t coords, std::uint64_t seed);
CheckResult check_long_term_gradient(std::size_t coords, std::uint64_t seed);
CheckResult check_focal_gradient(std::size_t coords, std::uint64_t seed);

/// Defaults: 289 window candidates, 256 similarity channels, and 107×60
/// matching features for an 854×480 frame.
CheckResult check_default_constants();

/// J/F/statistics fixtures with known answers.
CheckResult check_metrics_ground_truth();

/// Every check above with its default size; prints one row per check.
std::vector<CheckResult> run_selftest(std::ostream* log, std::uint64_t seed = 2024);

void print_result(std::ostream& os, const CheckResult& r);

} // namespace lsmvos::check
