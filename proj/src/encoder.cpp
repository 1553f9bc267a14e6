#include "lsmvos/encoder.hpp"

#include "lsmvos/error.hpp"

namespace lsmvos {

Tensor normalize_frame(const Image& frame) {
    if (frame.width == 0 || frame.height == 0 || frame.rgb.size() != frame.width * frame.height * 3)
        throw ShapeError("normalize_frame: invalid image buffer");
    const std::size_t P = frame.width * frame.height;
    Tensor out({3, frame.height, frame.width});
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t c = 0; c < 3; ++c)
            out[c * P + p] = (static_cast<float>(frame.rgb[p * 3 + c]) / 255.0f - kPixelMean[c]) / kPixelStd[c];
    return out;
}

namespace {

Tensor run_stage(const Tensor& x, const EncoderStage& stage) {
    Tensor y = relu(conv2d(x, stage.down));
    return add(y, relu(conv2d(y, stage.residual)));
}

} // namespace

EncoderFeatures encode(const Tensor& frame, const EncoderWeights& weights) {
    require_chw(frame, "encode");
    if (frame.height() % kFeatureStride != 0 || frame.width() % kFeatureStride != 0)
        throw ShapeError("encode: frame " + shape_str(frame.shape()) + " is not padded to a multiple of " +
                         std::to_string(kFeatureStride));
    EncoderFeatures f;
    f.s2 = run_stage(frame, weights.stages[0]);
    f.s4 = run_stage(f.s2, weights.stages[1]);
    f.s8 = run_stage(f.s4, weights.stages[2]);
    for (std::size_t i = 0; i < 3; ++i) {
        const Tensor& t = i == 0 ? f.s2 : i == 1 ? f.s4 : f.s8;
        const std::size_t stride = std::size_t{2} << i;
        if (t.height() * stride != frame.height() || t.width() * stride != frame.width())
            throw ShapeError("encode: stage " + std::to_string(i + 1) + " produced " + shape_str(t.shape()) +
                             ", expected stride " + std::to_string(stride) + " of " + shape_str(frame.shape()));
    }
    return f;
}

MatchFeatures branch(const EncoderFeatures& features, const BranchWeights& weights, bool normalize) {
    require_chw(features.s8, "branch");
    MatchFeatures m{aic2d(features.s8, weights.global), aic2d(features.s8, weights.local)};
    if (normalize) {
        m.global_feat = l2_normalize_channels(m.global_feat);
        m.local_feat = l2_normalize_channels(m.local_feat);
    }
    return m;
}

} // namespace lsmvos
