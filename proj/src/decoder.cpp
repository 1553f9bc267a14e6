#include "lsmvos/decoder.hpp"

#include "lsmvos/error.hpp"

#include <algorithm>
#include <array>

namespace lsmvos {

namespace {

// sigmoid saturates to exactly 0 or 1 in float; keep the open interval.
constexpr float kProbEps = 1e-6f;

} // namespace

Tensor fuse(const DecoderInput& input, const DecoderWeights& weights) {
    const Tensor& ref = input.feat_s8;
    require_chw(ref, "fuse");
    const Tensor& prev = input.prev_mask.values();
    const std::array<const Tensor*, 6> parts{&input.g_fg, &input.g_bg, &input.l_fg, &input.l_bg, &prev, &ref};
    for (const Tensor* t : parts) {
        require_chw(*t, "fuse");
        if (t->height() != ref.height() || t->width() != ref.width())
            throw ShapeError("fuse: decoder input " + shape_str(t->shape()) + " does not share stride-8 extents " +
                             shape_str(ref.shape()));
    }
    const Tensor stacked = concat_channels(parts);
    return aic2d(relu(conv2d(stacked, weights.fuse)), weights.fuse_aic);
}

Tensor refine(const Tensor& skip, const Tensor& coarse, const RefineWeights& weights) {
    require_chw(skip, "refine");
    require_chw(coarse, "refine");
    if (skip.height() != 2 * coarse.height() || skip.width() != 2 * coarse.width())
        throw ShapeError("refine: skip " + shape_str(skip.shape()) + " must be exactly twice the extents of " +
                         shape_str(coarse.shape()));
    return add(aic2d(skip, weights.skip_aic), bilinear_resize(conv2d(coarse, weights.project), {2, 1}));
}

Tensor segment_head(const Tensor& x, const ConvSpec& head, const CropRecord& crop) {
    if (!crop.valid()) throw ConfigError("segment_head: missing crop record");
    require_chw(x, "segment_head");
    if (crop.height > 2 * x.height() || crop.width > 2 * x.width())
        throw ShapeError("segment_head: crop " + std::to_string(crop.width) + "x" + std::to_string(crop.height) +
                         " exceeds the upsampled extents of " + shape_str(x.shape()));
    Tensor prob = bilinear_resize(sigmoid(conv2d(x, head)), {2, 1});
    for (float& v : prob.data()) v = std::clamp(v, kProbEps, 1.0f - kProbEps);
    return crop_to(prob, crop.height, crop.width);
}

Tensor decode(const DecoderInput& input, const EncoderFeatures& features, const CropRecord& crop,
              const DecoderWeights& weights) {
    Tensor x = fuse(input, weights);
    x = refine(features.s4, x, weights.refine_s4);
    x = refine(features.s2, x, weights.refine_s2);
    return segment_head(x, weights.head, crop);
}

} // namespace lsmvos
