#include "lsmvos/aic.hpp"

#include "lsmvos/error.hpp"

namespace lsmvos {

namespace {

void normalize_pass(AicPass& pass, const char* name) {
    const std::string where = std::string("aic2d ") + name + " pass";
    for (std::size_t s = 0; s < 3; ++s) {
        Tensor& k = pass.kernels[s];
        const std::size_t size = kAicKernelSizes[s];
        if (k.rank() == 3) {
            if (k.dim(2) != size)
                throw ShapeError(where + ": kernel " + std::to_string(s) + " has length " +
                                 std::to_string(k.dim(2)) + ", expected " + std::to_string(size));
            k = pass.axis == AicAxis::Width ? k.reshaped({k.dim(0), k.dim(1), 1, size})
                                            : k.reshaped({k.dim(0), k.dim(1), size, 1});
        }
        if (k.rank() != 4)
            throw ShapeError(where + ": kernel " + std::to_string(s) + " must be rank 3 or 4, got " +
                             shape_str(k.shape()));
        const Shape expected = pass.axis == AicAxis::Width ? Shape{k.dim(0), k.dim(1), 1, size}
                                                           : Shape{k.dim(0), k.dim(1), size, 1};
        if (k.shape() != expected)
            throw ShapeError(where + ": kernel " + std::to_string(s) + " shape " + shape_str(k.shape()) +
                             ", expected " + shape_str(expected));
        if (k.dim(0) != pass.kernels[0].dim(0) || k.dim(1) != pass.kernels[0].dim(1))
            throw ShapeError(where + ": kernel set disagrees on channel counts (" +
                             shape_str(pass.kernels[0].shape()) + " vs " + shape_str(k.shape()) + ")");
    }
    if (pass.bias.size() != pass.out_channels())
        throw ShapeError(where + ": bias has " + std::to_string(pass.bias.size()) + " entries, expected " +
                         std::to_string(pass.out_channels()));
    if (pass.select_weight.size() != 3 * pass.in_channels())
        throw ShapeError(where + ": selection weight shape " + shape_str(pass.select_weight.shape()) +
                         " incompatible with " + std::to_string(pass.in_channels()) + " input channels");
    pass.select_weight = pass.select_weight.reshaped({3, pass.in_channels(), 1, 1});
    if (pass.select_bias.size() != 3)
        throw ShapeError(where + ": selection bias must have 3 entries, got " +
                         shape_str(pass.select_bias.shape()));
}

} // namespace

Aic2dParams::Aic2dParams(AicPass width, AicPass height) : width_(std::move(width)), height_(std::move(height)) {
    width_.axis = AicAxis::Width;
    height_.axis = AicAxis::Height;
    normalize_pass(width_, "width");
    normalize_pass(height_, "height");
    if (height_.in_channels() != width_.out_channels())
        throw ShapeError("aic2d: height pass expects " + std::to_string(height_.in_channels()) +
                         " channels but width pass produces " + std::to_string(width_.out_channels()));
}

Tensor aic_selection_weights(const Tensor& x, const AicPass& pass) {
    ConvSpec select{pass.select_weight, pass.select_bias, 1, 0, 0};
    return softmax_channels(conv2d(x, select));
}

Tensor aic_kernel_response(const Tensor& x, const AicPass& pass, std::size_t which) {
    const auto half = static_cast<int>(kAicKernelSizes.at(which) / 2);
    ConvSpec spec{pass.kernels[which], Tensor{}, 1, 0, 0};
    (pass.axis == AicAxis::Width ? spec.pad_w : spec.pad_h) = half;
    return conv2d(x, spec);
}

Tensor aic_pass(const Tensor& x, const AicPass& pass) {
    require_chw(x, "aic2d");
    if (x.channels() != pass.in_channels())
        throw ShapeError("aic2d: input shape " + shape_str(x.shape()) + " incompatible with kernel shape " +
                         shape_str(pass.kernels[0].shape()));
    const Tensor weights = aic_selection_weights(x, pass);
    const std::size_t K = pass.out_channels(), P = x.plane();
    Tensor out({K, x.height(), x.width()});
    for (std::size_t s = 0; s < 3; ++s) {
        const Tensor response = aic_kernel_response(x, pass, s);
        const float* w = weights.ptr() + s * P;
        for (std::size_t k = 0; k < K; ++k) {
            const float* r = response.ptr() + k * P;
            float* o = out.ptr() + k * P;
            for (std::size_t p = 0; p < P; ++p) o[p] += w[p] * r[p];
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        float* o = out.ptr() + k * P;
        for (std::size_t p = 0; p < P; ++p) o[p] += pass.bias[k];
    }
    return out;
}

Tensor aic2d(const Tensor& x, const Aic2dParams& params) {
    return aic_pass(aic_pass(x, params.width()), params.height());
}

} // namespace lsmvos
