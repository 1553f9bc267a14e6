#pragma once

#include "lsmvos/aic.hpp"
#include "lsmvos/image.hpp"
#include "lsmvos/numerics.hpp"

#include <array>

namespace lsmvos {

inline constexpr std::size_t kFeatureStride = 8;
inline constexpr std::array<std::size_t, 3> kEncoderChannels{32, 64, 128};
inline constexpr std::size_t kMatchChannels = 128;

inline constexpr std::array<float, 3> kPixelMean{0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kPixelStd{0.229f, 0.224f, 0.225f};

/// Encoder outputs at strides 2, 4 and 8 of the padded frame.
struct EncoderFeatures {
    Tensor s2; // 32×H/2×W/2
    Tensor s4; // 64×H/4×W/4
    Tensor s8; // 128×H/8×W/8
};

/// Stride-8 features for long-term (global) and short-term (local) matching.
struct MatchFeatures {
    Tensor global_feat;
    Tensor local_feat;
};

/// One residual stage: y = relu(down(x)), out = y + relu(residual(y)).
/// `down` is a stride-2 3×3 convolution, `residual` a stride-1 3×3.
struct EncoderStage {
    ConvSpec down;
    ConvSpec residual;
};

struct EncoderWeights {
    std::array<EncoderStage, 3> stages;
};

struct BranchWeights {
    Aic2dParams global;
    Aic2dParams local;
};

/// RGB8 -> 3×H×W, scaled to [0,1] then normalized with kPixelMean/kPixelStd.
Tensor normalize_frame(const Image& frame);

/// Expects a normalized frame whose extents are multiples of kFeatureStride.
EncoderFeatures encode(const Tensor& frame, const EncoderWeights& weights);

/// Two independent AIC blocks over s8, each L2-normalized per position unless
/// `normalize` is false (raw dot-product matching).
MatchFeatures branch(const EncoderFeatures& features, const BranchWeights& weights, bool normalize = true);

} // namespace lsmvos
