#include "lsmvos/matching.hpp"

#include "lsmvos/error.hpp"
#include "lsmvos/numerics.hpp"
#include "lsmvos/parallel.hpp"

#include <algorithm>

namespace lsmvos {

GateMask::GateMask(Tensor values) : values_(std::move(values)) {
    if (values_.rank() != 3 || values_.channels() != 1)
        throw ShapeError("gate mask must be 1×H×W, got " + shape_str(values_.shape()));
    for (float v : values_.data())
        if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError("gate mask values must lie in [0, 1]");
}

GateMask GateMask::constant(std::size_t height, std::size_t width, float value) {
    return GateMask(Tensor({1, height, width}, value));
}

void MatchConfig::validate() const {
    if (k < 0) throw ConfigError("match config: window radius k must be >= 0, got " + std::to_string(k));
    if (n < 1) throw ConfigError("match config: n must be >= 1, got " + std::to_string(n));
}

GateMask downsample_mask(const Tensor& mask, std::size_t stride) {
    if (mask.rank() != 3 || mask.channels() != 1)
        throw ShapeError("downsample_mask: expected 1×H×W, got " + shape_str(mask.shape()));
    if (stride == 0 || mask.height() % stride != 0 || mask.width() % stride != 0)
        throw ShapeError("downsample_mask: extents " + shape_str(mask.shape()) + " not divisible by stride " +
                         std::to_string(stride));
    const std::size_t H = mask.height() / stride, W = mask.width() / stride;
    Tensor out({1, H, W});
    const double inv = 1.0 / static_cast<double>(stride * stride);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            double sum = 0.0;
            for (std::size_t dy = 0; dy < stride; ++dy)
                for (std::size_t dx = 0; dx < stride; ++dx) sum += mask.at(0, y * stride + dy, x * stride + dx);
            out.at(0, y, x) = std::clamp(static_cast<float>(sum * inv), 0.0f, 1.0f);
        }
    return GateMask(std::move(out));
}

namespace {

// C×H×W -> (H*W)×C so each position's feature vector is contiguous.
std::vector<float> position_major(const Tensor& t) {
    const std::size_t C = t.channels(), P = t.plane();
    std::vector<float> out(C * P);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t p = 0; p < P; ++p) out[p * C + c] = t[c * P + p];
    return out;
}

std::vector<float> effective_gate(const GateMask& gate, GatePolarity polarity) {
    std::vector<float> g(gate.values().data().begin(), gate.values().data().end());
    if (polarity == GatePolarity::Background)
        for (float& v : g) v = 1.0f - v;
    return g;
}

MatchResult empty_result(std::size_t n, std::size_t H, std::size_t W) {
    return {Tensor({n, H, W}), std::vector<std::int32_t>(n * H * W, -1)};
}

void check_features(const Tensor& cur, const Tensor& other, const GateMask& gate, const char* what) {
    require_chw(cur, what);
    require_chw(other, what);
    if (cur.channels() != other.channels())
        throw ShapeError(std::string(what) + ": channel mismatch " + shape_str(cur.shape()) + " vs " +
                         shape_str(other.shape()));
    if (gate.values().empty() || gate.height() != other.height() || gate.width() != other.width())
        throw ShapeError(std::string(what) + ": gate extents do not match features " + shape_str(other.shape()));
}

// Gates the raw similarities for each requested polarity and stores the top n.
template <std::size_t NP>
void select_into(std::span<const float> sims, std::span<const std::int32_t> candidates,
                 const std::array<const std::vector<float>*, NP>& gates, std::size_t n, std::size_t p, std::size_t P,
                 std::array<MatchResult, NP>& results, std::vector<float>& gated, std::vector<float>& top,
                 std::vector<std::int32_t>& index) {
    const std::size_t m = sims.size();
    for (std::size_t g = 0; g < NP; ++g) {
        const std::vector<float>& gate = *gates[g];
        gated.resize(m);
        for (std::size_t i = 0; i < m; ++i) gated[i] = sims[i] * gate[static_cast<std::size_t>(candidates[i])];
        const std::size_t got = select_top_n(gated, n, top, index);
        // Missing candidates become zero-valued fill slots (source -1) placed
        // after every non-negative value.
        const std::size_t fill = n - got;
        float* dst = results[g].similarity.ptr();
        std::int32_t* src = results[g].source.data();
        for (std::size_t r = 0; r < got; ++r) {
            const std::size_t row = top[r] < 0.0f ? r + fill : r;
            dst[row * P + p] = top[r];
            src[row * P + p] = candidates[static_cast<std::size_t>(index[r])];
        }
    }
}

template <std::size_t NP>
std::array<MatchResult, NP> short_term_impl(const Tensor& cur, const Tensor& prev, const GateMask& gate,
                                            const std::array<GatePolarity, NP>& polarities, const MatchConfig& cfg) {
    cfg.validate();
    check_features(cur, prev, gate, "short_term_match");
    require_same_shape(cur, prev, "short_term_match");
    const std::size_t C = cur.channels(), H = cur.height(), W = cur.width(), P = H * W;
    const std::size_t n = static_cast<std::size_t>(cfg.n);
    const auto k = static_cast<std::ptrdiff_t>(cfg.k);

    const std::vector<float> a = position_major(cur), b = position_major(prev);
    std::array<std::vector<float>, NP> gate_values;
    std::array<const std::vector<float>*, NP> gates{};
    std::array<MatchResult, NP> results;
    for (std::size_t g = 0; g < NP; ++g) {
        gate_values[g] = effective_gate(gate, polarities[g]);
        gates[g] = &gate_values[g];
        results[g] = empty_result(n, H, W);
    }

    parallel_for(0, P, [&](std::size_t lo, std::size_t hi) {
        std::vector<float> sims, gated, top(n);
        std::vector<std::int32_t> candidates, index(n);
        for (std::size_t p = lo; p < hi; ++p) {
            const auto i = static_cast<std::ptrdiff_t>(p / W), j = static_cast<std::ptrdiff_t>(p % W);
            sims.clear();
            candidates.clear();
            const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, i - k);
            const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(H) - 1, i + k);
            const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, j - k);
            const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(W) - 1, j + k);
            for (std::ptrdiff_t y = y0; y <= y1; ++y)
                for (std::ptrdiff_t x = x0; x <= x1; ++x) {
                    const auto q = static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x);
                    sims.push_back(feature_dot(a.data() + p * C, b.data() + q * C, C));
                    candidates.push_back(static_cast<std::int32_t>(q));
                }
            select_into<NP>(sims, candidates, gates, n, p, P, results, gated, top, index);
        }
    }, 16);
    return results;
}

template <std::size_t NP>
std::array<MatchResult, NP> long_term_impl(const Tensor& cur, const Tensor& ref, const GateMask& gate,
                                           const std::array<GatePolarity, NP>& polarities, const MatchConfig& cfg) {
    cfg.validate();
    check_features(cur, ref, gate, "long_term_match");
    const std::size_t C = cur.channels(), H = cur.height(), W = cur.width(), P = H * W, Q = ref.plane();
    const std::size_t n = static_cast<std::size_t>(cfg.n);

    const std::vector<float> a = position_major(cur), b = position_major(ref);
    std::array<std::vector<float>, NP> gate_values;
    std::array<const std::vector<float>*, NP> gates{};
    std::array<MatchResult, NP> results;
    for (std::size_t g = 0; g < NP; ++g) {
        gate_values[g] = effective_gate(gate, polarities[g]);
        gates[g] = &gate_values[g];
        results[g] = empty_result(n, H, W);
    }
    std::vector<std::int32_t> candidates(Q);
    for (std::size_t q = 0; q < Q; ++q) candidates[q] = static_cast<std::int32_t>(q);

    parallel_for(0, P, [&](std::size_t lo, std::size_t hi) {
        std::vector<float> sims(Q), gated, top(n);
        std::vector<std::int32_t> index(n);
        for (std::size_t p = lo; p < hi; ++p) {
            const float* row = a.data() + p * C;
            for (std::size_t q = 0; q < Q; ++q) sims[q] = feature_dot(row, b.data() + q * C, C);
            select_into<NP>(sims, candidates, gates, n, p, P, results, gated, top, index);
        }
    }, 8);
    return results;
}

MatchGradients backward_impl(const Tensor& upstream, const Tensor& cur, const Tensor& other, const GateMask& gate,
                             GatePolarity polarity, const MatchResult& forward, const char* what) {
    check_features(cur, other, gate, what);
    const std::size_t C = cur.channels(), P = cur.plane(), Q = other.plane();
    if (upstream.rank() != 3 || upstream.height() != cur.height() || upstream.width() != cur.width())
        throw ShapeError(std::string(what) + ": upstream gradient " + shape_str(upstream.shape()) +
                         " does not match features " + shape_str(cur.shape()));
    if (forward.source.empty() || forward.source.size() != upstream.size() ||
        forward.similarity.shape() != upstream.shape())
        throw ConfigError(std::string(what) + ": forward pass did not save selected indices for this gradient");

    const std::vector<float> g = effective_gate(gate, polarity);
    const std::size_t n = upstream.channels();
    MatchGradients grads{Tensor(cur.shape()), Tensor(other.shape())};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t p = 0; p < P; ++p) {
            const std::int32_t src = forward.source[r * P + p];
            if (src < 0) continue;
            const auto q = static_cast<std::size_t>(src);
            if (q >= Q) throw ConfigError(std::string(what) + ": saved index out of range");
            const float w = upstream[r * P + p] * g[q];
            if (w == 0.0f) continue;
            for (std::size_t c = 0; c < C; ++c) {
                grads.cur[c * P + p] += w * other[c * Q + q];
                grads.other[c * Q + q] += w * cur[c * P + p];
            }
        }
    return grads;
}

} // namespace

MatchResult short_term_match(const Tensor& cur, const Tensor& prev, const GateMask& gate, GatePolarity polarity,
                             const MatchConfig& cfg) {
    return std::move(short_term_impl<1>(cur, prev, gate, {polarity}, cfg)[0]);
}

std::array<MatchResult, 2> short_term_match_pair(const Tensor& cur, const Tensor& prev, const GateMask& gate,
                                                 const MatchConfig& cfg) {
    return short_term_impl<2>(cur, prev, gate, {GatePolarity::Foreground, GatePolarity::Background}, cfg);
}

MatchResult long_term_match(const Tensor& cur, const Tensor& ref, const GateMask& ref_gate, GatePolarity polarity,
                            const MatchConfig& cfg) {
    return std::move(long_term_impl<1>(cur, ref, ref_gate, {polarity}, cfg)[0]);
}

std::array<MatchResult, 2> long_term_match_pair(const Tensor& cur, const Tensor& ref, const GateMask& ref_gate,
                                                const MatchConfig& cfg) {
    return long_term_impl<2>(cur, ref, ref_gate, {GatePolarity::Foreground, GatePolarity::Background}, cfg);
}

MatchGradients short_term_match_backward(const Tensor& upstream, const Tensor& cur, const Tensor& prev,
                                         const GateMask& gate, GatePolarity polarity, const MatchResult& forward) {
    require_same_shape(cur, prev, "short_term_match_backward");
    return backward_impl(upstream, cur, prev, gate, polarity, forward, "short_term_match_backward");
}

MatchGradients long_term_match_backward(const Tensor& upstream, const Tensor& cur, const Tensor& ref,
                                        const GateMask& ref_gate, GatePolarity polarity, const MatchResult& forward) {
    return backward_impl(upstream, cur, ref, ref_gate, polarity, forward, "long_term_match_backward");
}

} // namespace lsmvos
