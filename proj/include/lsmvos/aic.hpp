#pragma once

#include "lsmvos/numerics.hpp"
#include "lsmvos/tensor.hpp"

#include <array>

namespace lsmvos {

enum class AicAxis { Width, Height };

inline constexpr std::array<std::size_t, 3> kAicKernelSizes{1, 3, 5};

/// One axis pass of the 2D anisotropic convolution: three 1D kernels of sizes
/// 1, 3 and 5 along `axis`, blended per position by a softmax over a 1×1
/// selection convolution.
///
/// Kernels are stored as C_out×C_in×1×k (width pass) or C_out×C_in×k×1
/// (height pass); rank-3 C_out×C_in×k tensors are accepted and reshaped.
struct AicPass {
    AicAxis axis = AicAxis::Width;
    std::array<Tensor, 3> kernels;
    Tensor bias;          // C_out
    Tensor select_weight; // 3×C_in×1×1
    Tensor select_bias;   // 3

    std::size_t in_channels() const { return kernels[0].dim(1); }
    std::size_t out_channels() const { return kernels[0].dim(0); }
};

/// Width pass followed by height pass. Construction validates that every
/// kernel shape is mutually consistent and throws ShapeError otherwise.
class Aic2dParams {
public:
    Aic2dParams() = default;
    Aic2dParams(AicPass width, AicPass height);

    const AicPass& width() const noexcept { return width_; }
    const AicPass& height() const noexcept { return height_; }
    std::size_t in_channels() const { return width_.in_channels(); }
    std::size_t out_channels() const { return height_.out_channels(); }

private:
    AicPass width_;
    AicPass height_;
};

/// Softmax selection weights (3×H×W) a pass assigns to its kernel sizes.
Tensor aic_selection_weights(const Tensor& x, const AicPass& pass);

/// Output of a single kernel of a pass, without selection or bias.
Tensor aic_kernel_response(const Tensor& x, const AicPass& pass, std::size_t which);

Tensor aic_pass(const Tensor& x, const AicPass& pass);

/// C_in×H×W -> C_out×H×W.
Tensor aic2d(const Tensor& x, const Aic2dParams& params);

} // namespace lsmvos
