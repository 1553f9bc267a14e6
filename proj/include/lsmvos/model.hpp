#pragma once

#include "lsmvos/decoder.hpp"
#include "lsmvos/encoder.hpp"
#include "lsmvos/weights.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lsmvos {

struct ParamSpec {
    std::string name;
    Shape shape;
    std::size_t fan_in = 1;
};

/// Every named tensor the network uses, in container order. `n` is the
/// similarity channel count, which fixes the fuse layer's input width.
std::vector<ParamSpec> model_layout(int n = 256);

/// Deterministic weights for `model_layout(n)`.
///
/// A single std::mt19937_64 seeded with `seed` is drawn in layout order. Each
/// value is (2u - 1) * sqrt(3 / fan_in) with u = (draw >> 40) / 2^24, i.e.
/// uniform with standard deviation 1/sqrt(fan_in). Biases use the fan-in of
/// their layer.
WeightsContainer seeded_init(std::uint64_t seed, int n = 256);

struct Model {
    EncoderWeights encoder;
    BranchWeights branches;
    DecoderWeights decoder;
    int n = 256;

    /// Resolves every layout entry; throws ConfigError on missing names and
    /// ShapeError on shape disagreements.
    static Model from_weights(const WeightsContainer& weights);
};

} // namespace lsmvos
