#pragma once

#include "lsmvos/image.hpp"

#include <cstdint>
#include <vector>

namespace lsmvos {

/// Procedural clip of textured squares drifting over a smooth noisy
/// background. labels[t] is the exact ground truth of frames[t]; later
/// objects are drawn over earlier ones.
struct SyntheticClip {
    std::vector<Image> frames;
    std::vector<LabelMap> labels;
};

SyntheticClip make_synthetic_clip(std::size_t width, std::size_t height, std::size_t objects, std::size_t frames,
                                  std::uint64_t seed);

} // namespace lsmvos
