#pragma once

#include "lsmvos/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lsmvos {

/// Convolution parameters. kernel is K×C×kh×kw, bias has K entries (or is
/// empty for no bias).
struct ConvSpec {
    Tensor kernel;
    Tensor bias;
    int stride = 1;
    int pad_h = 0;
    int pad_w = 0;

    std::size_t out_channels() const { return kernel.dim(0); }
    std::size_t in_channels() const { return kernel.dim(1); }
    std::size_t kernel_h() const { return kernel.dim(2); }
    std::size_t kernel_w() const { return kernel.dim(3); }

    /// floor((in + 2*pad - k) / stride) + 1; throws ShapeError when < 1.
    std::size_t out_height(std::size_t in) const;
    std::size_t out_width(std::size_t in) const;
};

/// Zero-padded cross-correlation. Output is K×H'×W'.
Tensor conv2d(const Tensor& x, const ConvSpec& spec);

/// Positive rational scale factor, e.g. {2, 1} or {1, 8}.
struct Ratio {
    std::int64_t num = 1;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::size_t apply(std::size_t extent) const;
};

/// Bilinear resampling with half-pixel centers: src = (dst + 0.5) / factor - 0.5,
/// clamped to the valid range. Output extents are floor(in * factor).
Tensor bilinear_resize(const Tensor& x, Ratio factor);

Tensor l2_normalize_channels(const Tensor& x, float eps = 1e-8f);

/// Picks the n largest values in descending order; equal values are ordered by
/// lower index first. Writes min(n, values.size()) entries to out_values /
/// out_index and returns that count.
std::size_t select_top_n(std::span<const float> values, std::size_t n, std::span<float> out_values,
                         std::span<std::int32_t> out_index);

/// Per-position top-n over the channel axis; the tail is zero-filled when n > C.
Tensor topk_per_position(const Tensor& x, std::size_t n);

/// Dot product with a fixed eight-lane accumulation order. Every similarity in
/// the matching module goes through this so window and global matching agree
/// bit for bit.
float feature_dot(const float* a, const float* b, std::size_t n) noexcept;

struct FocalLossResult {
    double loss = 0.0;
    Tensor grad; // d loss / d p, same shape as p
};

inline constexpr float kFocalEps = 1e-7f;
inline constexpr float kFocalGamma = 2.0f;
inline constexpr float kFocalAlpha = 0.25f;

/// Mean focal loss over pixels with its analytic gradient w.r.t. p.
FocalLossResult focal_loss(const Tensor& p, const Tensor& target, float gamma = kFocalGamma,
                           float alpha = kFocalAlpha);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor concat_channels(std::span<const Tensor* const> parts);
Tensor softmax_channels(const Tensor& x);

/// Copies x into the top-left corner of a zero C×height×width tensor.
Tensor zero_pad_to(const Tensor& x, std::size_t height, std::size_t width);

/// Top-left height×width window of x.
Tensor crop_to(const Tensor& x, std::size_t height, std::size_t width);

} // namespace lsmvos
