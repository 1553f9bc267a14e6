#include "lsmvos/numerics.hpp"

#include "lsmvos/error.hpp"
#include "lsmvos/parallel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <utility>

namespace lsmvos {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Output positions per GEMM. Fixed so the product blocking (and therefore the
// rounding) never depends on the worker count.
constexpr std::size_t kConvChunk = 1024;

std::size_t conv_extent(std::size_t in, std::size_t k, int pad, int stride, const char* axis) {
    const auto padded = static_cast<std::int64_t>(in) + 2 * pad;
    if (padded < static_cast<std::int64_t>(k))
        throw ShapeError(std::string("conv2d: non-positive output ") + axis + " extent (input " +
                         std::to_string(in) + ", kernel " + std::to_string(k) + ", pad " + std::to_string(pad) +
                         ")");
    return static_cast<std::size_t>((padded - static_cast<std::int64_t>(k)) / stride) + 1;
}

void validate_conv(const Tensor& x, const ConvSpec& spec) {
    require_chw(x, "conv2d input");
    if (spec.kernel.rank() != 4)
        throw ShapeError("conv2d: kernel must be K×C×kh×kw, got " + shape_str(spec.kernel.shape()));
    if (spec.stride < 1 || spec.pad_h < 0 || spec.pad_w < 0)
        throw ConfigError("conv2d: stride must be >= 1 and padding >= 0");
    if (x.channels() != spec.in_channels())
        throw ShapeError("conv2d: input shape " + shape_str(x.shape()) + " incompatible with kernel shape " +
                         shape_str(spec.kernel.shape()));
    if (!spec.bias.empty() && spec.bias.size() != spec.out_channels())
        throw ShapeError("conv2d: bias shape " + shape_str(spec.bias.shape()) + " incompatible with kernel shape " +
                         shape_str(spec.kernel.shape()));
}

} // namespace

std::size_t ConvSpec::out_height(std::size_t in) const { return conv_extent(in, kernel_h(), pad_h, stride, "height"); }

std::size_t ConvSpec::out_width(std::size_t in) const { return conv_extent(in, kernel_w(), pad_w, stride, "width"); }

Tensor conv2d(const Tensor& x, const ConvSpec& spec) {
    validate_conv(x, spec);
    const std::size_t C = x.channels(), H = x.height(), W = x.width();
    const std::size_t K = spec.out_channels(), kh = spec.kernel_h(), kw = spec.kernel_w();
    const std::size_t OH = spec.out_height(H), OW = spec.out_width(W);
    const std::size_t P = OH * OW, D = C * kh * kw;
    const std::size_t S = static_cast<std::size_t>(spec.stride);
    const auto ph = static_cast<std::ptrdiff_t>(spec.pad_h), pw = static_cast<std::ptrdiff_t>(spec.pad_w);

    Tensor out({K, OH, OW});
    const bool pointwise = kh == 1 && kw == 1 && S == 1 && ph == 0 && pw == 0;
    const std::size_t chunks = (P + kConvChunk - 1) / kConvChunk;
    Eigen::Map<const RowMat> weights(spec.kernel.ptr(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(D));

    parallel_for(0, chunks, [&](std::size_t lo, std::size_t hi) {
        std::vector<float> col;
        for (std::size_t chunk = lo; chunk < hi; ++chunk) {
            const std::size_t p0 = chunk * kConvChunk;
            const std::size_t np = std::min(kConvChunk, P - p0);
            Eigen::Map<RowMat, 0, Eigen::OuterStride<>> dst(out.ptr() + p0, static_cast<Eigen::Index>(K),
                                                           static_cast<Eigen::Index>(np),
                                                           Eigen::OuterStride<>(static_cast<Eigen::Index>(P)));
            if (pointwise) {
                Eigen::Map<const RowMat, 0, Eigen::OuterStride<>> src(
                    x.ptr() + p0, static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(np),
                    Eigen::OuterStride<>(static_cast<Eigen::Index>(P)));
                dst.noalias() = weights * src;
            } else {
                col.assign(D * np, 0.0f);
                for (std::size_t c = 0; c < C; ++c) {
                    const float* plane = x.ptr() + c * H * W;
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            float* row = col.data() + ((c * kh + ky) * kw + kx) * np;
                            for (std::size_t i = 0; i < np; ++i) {
                                const std::size_t p = p0 + i;
                                const auto iy = static_cast<std::ptrdiff_t>((p / OW) * S + ky) - ph;
                                const auto ix = static_cast<std::ptrdiff_t>((p % OW) * S + kx) - pw;
                                if (iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(H) &&
                                    ix < static_cast<std::ptrdiff_t>(W))
                                    row[i] = plane[static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)];
                            }
                        }
                    }
                }
                Eigen::Map<const RowMat> src(col.data(), static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(np));
                dst.noalias() = weights * src;
            }
            if (!spec.bias.empty())
                for (std::size_t k = 0; k < K; ++k) dst.row(static_cast<Eigen::Index>(k)).array() += spec.bias[k];
        }
    });
    return out;
}

std::size_t Ratio::apply(std::size_t extent) const {
    if (num <= 0 || den <= 0) throw ConfigError("resize factor must be positive");
    return static_cast<std::size_t>(static_cast<std::int64_t>(extent) * num / den);
}

Tensor bilinear_resize(const Tensor& x, Ratio factor) {
    require_chw(x, "bilinear_resize");
    if (factor.num <= 0 || factor.den <= 0)
        throw ConfigError("bilinear_resize: factor must be > 0, got " + std::to_string(factor.num) + "/" +
                          std::to_string(factor.den));
    const std::size_t C = x.channels(), H = x.height(), W = x.width();
    const std::size_t OH = factor.apply(H), OW = factor.apply(W);
    if (OH == 0 || OW == 0) throw ShapeError("bilinear_resize: output extent < 1 for input " + shape_str(x.shape()));
    if (OH == H && OW == W) return x;

    struct Tap {
        std::size_t i0, i1;
        float frac;
    };
    auto taps = [&](std::size_t out_n, std::size_t in_n) {
        std::vector<Tap> t(out_n);
        const double inv = static_cast<double>(factor.den) / static_cast<double>(factor.num);
        for (std::size_t o = 0; o < out_n; ++o) {
            double s = (static_cast<double>(o) + 0.5) * inv - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(in_n - 1));
            const auto i0 = static_cast<std::size_t>(std::floor(s));
            t[o] = {i0, std::min(i0 + 1, in_n - 1), static_cast<float>(s - static_cast<double>(i0))};
        }
        return t;
    };
    const auto ty = taps(OH, H), tx = taps(OW, W);

    Tensor out({C, OH, OW});
    parallel_for(0, C * OH, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            const std::size_t c = r / OH, oy = r % OH;
            const float* r0 = x.ptr() + (c * H + ty[oy].i0) * W;
            const float* r1 = x.ptr() + (c * H + ty[oy].i1) * W;
            float* dst = out.ptr() + r * OW;
            const float fy = ty[oy].frac;
            for (std::size_t ox = 0; ox < OW; ++ox) {
                const Tap& t = tx[ox];
                // a + f*(b-a) keeps constants exact.
                const float top = r0[t.i0] + t.frac * (r0[t.i1] - r0[t.i0]);
                const float bot = r1[t.i0] + t.frac * (r1[t.i1] - r1[t.i0]);
                dst[ox] = top + fy * (bot - top);
            }
        }
    });
    return out;
}

Tensor l2_normalize_channels(const Tensor& x, float eps) {
    require_chw(x, "l2_normalize_channels");
    if (!(eps > 0.0f)) throw ConfigError("l2_normalize_channels: eps must be > 0");
    const std::size_t C = x.channels(), P = x.plane();
    Tensor out(x.shape());
    parallel_for(0, P, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double sq = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double v = x[c * P + p];
                sq += v * v;
            }
            const float norm = std::max(static_cast<float>(std::sqrt(sq)), eps);
            for (std::size_t c = 0; c < C; ++c) out[c * P + p] = x[c * P + p] / norm;
        }
    }, 256);
    return out;
}

std::size_t select_top_n(std::span<const float> values, std::size_t n, std::span<float> out_values,
                         std::span<std::int32_t> out_index) {
    const std::size_t m = values.size();
    const std::size_t take = std::min(n, m);
    if (out_values.size() < take || out_index.size() < take)
        throw ShapeError("select_top_n: output spans too small");
    if (take == 0) return 0;

    thread_local std::vector<float> scratch;
    thread_local std::vector<std::pair<float, std::int32_t>> picked;
    picked.clear();
    if (take == m) {
        for (std::size_t i = 0; i < m; ++i) picked.emplace_back(values[i], static_cast<std::int32_t>(i));
    } else {
        scratch.assign(values.begin(), values.end());
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take - 1), scratch.end(),
                         std::greater<float>());
        const float threshold = scratch[take - 1];
        for (std::size_t i = 0; i < m; ++i)
            if (values[i] > threshold) picked.emplace_back(values[i], static_cast<std::int32_t>(i));
        for (std::size_t i = 0; i < m && picked.size() < take; ++i)
            if (values[i] == threshold) picked.emplace_back(values[i], static_cast<std::int32_t>(i));
    }
    std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::size_t i = 0; i < take; ++i) {
        out_values[i] = picked[i].first;
        out_index[i] = picked[i].second;
    }
    return take;
}

Tensor topk_per_position(const Tensor& x, std::size_t n) {
    require_chw(x, "topk_per_position");
    if (n < 1) throw ConfigError("topk_per_position: n must be >= 1");
    const std::size_t C = x.channels(), P = x.plane();
    Tensor out({n, x.height(), x.width()});
    parallel_for(0, P, [&](std::size_t lo, std::size_t hi) {
        std::vector<float> column(C), top(n);
        std::vector<std::int32_t> index(n);
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t c = 0; c < C; ++c) column[c] = x[c * P + p];
            const std::size_t got = select_top_n(column, n, top, index);
            for (std::size_t r = 0; r < n; ++r) out[r * P + p] = r < got ? top[r] : 0.0f;
        }
    }, 64);
    return out;
}

float feature_dot(const float* a, const float* b, std::size_t n) noexcept {
    float acc[8] = {0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
    for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += a[i] * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

FocalLossResult focal_loss(const Tensor& p, const Tensor& target, float gamma, float alpha) {
    require_same_shape(p, target, "focal_loss");
    if (gamma < 0.0f) throw ConfigError("focal_loss: gamma must be >= 0");
    if (!(alpha > 0.0f && alpha < 1.0f)) throw ConfigError("focal_loss: alpha must lie in (0, 1)");

    const std::size_t n = p.size();
    const double g = gamma, a = alpha, eps = kFocalEps;
    FocalLossResult res{0.0, Tensor(p.shape())};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double raw = p[i];
        const double q = std::clamp(raw, eps, 1.0 - eps);
        const bool clamped = raw < eps || raw > 1.0 - eps;
        double loss = 0.0, grad = 0.0;
        if (target[i] > 0.5f) {
            const double w = std::pow(1.0 - q, g);
            loss = -a * w * std::log(q);
            const double dw = g == 0.0 ? 0.0 : -g * std::pow(1.0 - q, g - 1.0);
            grad = -a * (dw * std::log(q) + w / q);
        } else {
            const double w = std::pow(q, g);
            loss = -(1.0 - a) * w * std::log(1.0 - q);
            const double dw = g == 0.0 ? 0.0 : g * std::pow(q, g - 1.0);
            grad = -(1.0 - a) * (dw * std::log(1.0 - q) - w / (1.0 - q));
        }
        total += loss;
        res.grad[i] = clamped ? 0.0f : static_cast<float>(grad / static_cast<double>(n));
    }
    res.loss = total / static_cast<double>(n);
    return res;
}

namespace {

template <class F>
Tensor map_unary(const Tensor& x, F f) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return out;
}

template <class F>
Tensor map_binary(const Tensor& a, const Tensor& b, const char* what, F f) {
    require_same_shape(a, b, what);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

} // namespace

Tensor relu(const Tensor& x) {
    return map_unary(x, [](float v) { return v > 0.0f ? v : 0.0f; });
}

Tensor sigmoid(const Tensor& x) {
    return map_unary(x, [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
}

Tensor add(const Tensor& a, const Tensor& b) {
    return map_binary(a, b, "add", [](float u, float v) { return u + v; });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
    return map_binary(a, b, "multiply", [](float u, float v) { return u * v; });
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no inputs");
    std::size_t C = 0;
    for (const Tensor* t : parts) {
        require_chw(*t, "concat_channels");
        if (t->height() != parts[0]->height() || t->width() != parts[0]->width())
            throw ShapeError("concat_channels: spatial mismatch " + shape_str(parts[0]->shape()) + " vs " +
                             shape_str(t->shape()));
        C += t->channels();
    }
    std::vector<float> data;
    data.reserve(C * parts[0]->plane());
    for (const Tensor* t : parts) data.insert(data.end(), t->data().begin(), t->data().end());
    return Tensor({C, parts[0]->height(), parts[0]->width()}, std::move(data));
}

Tensor softmax_channels(const Tensor& x) {
    require_chw(x, "softmax_channels");
    const std::size_t C = x.channels(), P = x.plane();
    Tensor out(x.shape());
    for (std::size_t p = 0; p < P; ++p) {
        float mx = x[p];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, x[c * P + p]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) sum += std::exp(static_cast<double>(x[c * P + p] - mx));
        for (std::size_t c = 0; c < C; ++c)
            out[c * P + p] = static_cast<float>(std::exp(static_cast<double>(x[c * P + p] - mx)) / sum);
    }
    return out;
}

Tensor zero_pad_to(const Tensor& x, std::size_t height, std::size_t width) {
    require_chw(x, "zero_pad_to");
    if (height < x.height() || width < x.width())
        throw ShapeError("zero_pad_to: target " + std::to_string(height) + "x" + std::to_string(width) +
                         " smaller than " + shape_str(x.shape()));
    Tensor out({x.channels(), height, width});
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t h = 0; h < x.height(); ++h)
            std::copy_n(x.ptr() + (c * x.height() + h) * x.width(), x.width(), out.ptr() + (c * height + h) * width);
    return out;
}

Tensor crop_to(const Tensor& x, std::size_t height, std::size_t width) {
    require_chw(x, "crop_to");
    if (height == 0 || width == 0 || height > x.height() || width > x.width())
        throw ShapeError("crop_to: window " + std::to_string(height) + "x" + std::to_string(width) +
                         " invalid for " + shape_str(x.shape()));
    Tensor out({x.channels(), height, width});
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t h = 0; h < height; ++h)
            std::copy_n(x.ptr() + (c * x.height() + h) * x.width(), width, out.ptr() + (c * height + h) * width);
    return out;
}

} // namespace lsmvos
