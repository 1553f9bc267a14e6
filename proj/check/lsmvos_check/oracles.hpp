#pragma once

// Reference implementations used as independent oracles. Everything here is
// written for clarity, accumulates in double, and shares no code path with
// the kernels it checks.

#include "lsmvos/matching.hpp"
#include "lsmvos/numerics.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace lsmvos::check {

/// Six nested loops, zero padding.
Tensor conv2d_reference(const Tensor& x, const ConvSpec& spec);

struct ReferenceMatch {
    std::size_t n = 0, height = 0, width = 0;
    std::vector<double> values;      // n×H×W
    std::vector<std::int32_t> source; // n×H×W, -1 for fill

    Tensor as_tensor() const;
};

/// Enumerates every in-image candidate of the (2k+1)² window, gates it, sorts
/// the whole candidate list by (value desc, source asc) and keeps n.
ReferenceMatch short_term_reference(const Tensor& cur, const Tensor& prev, const Tensor& gate, GatePolarity polarity,
                                    int k, int n);

/// All-pairs counterpart of short_term_reference.
ReferenceMatch long_term_reference(const Tensor& cur, const Tensor& ref, const Tensor& gate, GatePolarity polarity,
                                   int n);

/// Scalar focal loss, mean over pixels, in double.
double focal_loss_reference(const std::vector<double>& p, const std::vector<double>& target, double gamma,
                            double alpha);

/// Relative error with a small floor so exact zeros compare cleanly.
double relative_error(double analytic, double numeric, double floor = 1e-4);

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, float scale = 1.0f);
Tensor random_unit_features(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng);
Tensor random_gate(std::size_t h, std::size_t w, std::mt19937_64& rng);

double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace lsmvos::check
