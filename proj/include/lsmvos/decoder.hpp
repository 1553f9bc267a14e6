#pragma once

#include "lsmvos/aic.hpp"
#include "lsmvos/encoder.hpp"
#include "lsmvos/image.hpp"
#include "lsmvos/matching.hpp"

namespace lsmvos {

inline constexpr std::size_t kDecoderChannels = 128;

/// Everything the decoder consumes at stride 8. Similarity maps are n×H×W,
/// the previous mask is the stride-8 gate and feat_s8 the encoder's s8 output.
struct DecoderInput {
    Tensor g_fg, g_bg;
    Tensor l_fg, l_bg;
    GateMask prev_mask;
    Tensor feat_s8;
};

struct RefineWeights {
    Aic2dParams skip_aic;
    ConvSpec project; // 1×1, coarse channels -> skip channels
};

struct DecoderWeights {
    ConvSpec fuse; // 1×1, (4n + 1 + 128) -> 128
    Aic2dParams fuse_aic;
    RefineWeights refine_s4;
    RefineWeights refine_s2;
    ConvSpec head; // 3×3, 32 -> 1
};

/// concat -> 1×1 conv -> relu -> aic2d. Output D×H/8×W/8.
Tensor fuse(const DecoderInput& input, const DecoderWeights& weights);

/// aic2d(skip) + bilinear×2(project(coarse)). skip extents must be exactly
/// double the coarse extents.
Tensor refine(const Tensor& skip, const Tensor& coarse, const RefineWeights& weights);

/// 3×3 conv -> sigmoid -> bilinear×2 -> crop. Returns 1×H₀×W₀ with every value
/// strictly inside (0, 1).
Tensor segment_head(const Tensor& x, const ConvSpec& head, const CropRecord& crop);

/// fuse -> refine(s4) -> refine(s2) -> segment_head.
Tensor decode(const DecoderInput& input, const EncoderFeatures& features, const CropRecord& crop,
              const DecoderWeights& weights);

} // namespace lsmvos
