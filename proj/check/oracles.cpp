#include "lsmvos_check/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lsmvos::check {

Tensor conv2d_reference(const Tensor& x, const ConvSpec& spec) {
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t K = spec.kernel.dim(0), kh = spec.kernel.dim(2), kw = spec.kernel.dim(3);
    const long s = spec.stride, ph = spec.pad_h, pw = spec.pad_w;
    const long OH = (static_cast<long>(H) + 2 * ph - static_cast<long>(kh)) / s + 1;
    const long OW = (static_cast<long>(W) + 2 * pw - static_cast<long>(kw)) / s + 1;
    if (OH < 1 || OW < 1 || spec.kernel.dim(1) != C) throw std::invalid_argument("conv2d_reference: bad shapes");
    Tensor out({K, static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)});
    for (std::size_t k = 0; k < K; ++k)
        for (long oy = 0; oy < OH; ++oy)
            for (long ox = 0; ox < OW; ++ox) {
                double acc = spec.bias.empty() ? 0.0 : spec.bias[k];
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            const long iy = oy * s - ph + static_cast<long>(ky);
                            const long ix = ox * s - pw + static_cast<long>(kx);
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(H) || ix >= static_cast<long>(W)) continue;
                            acc += static_cast<double>(spec.kernel[((k * C + c) * kh + ky) * kw + kx]) *
                                   x.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
                        }
                out.at(k, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) = static_cast<float>(acc);
            }
    return out;
}

Tensor ReferenceMatch::as_tensor() const {
    std::vector<float> v(values.size());
    std::transform(values.begin(), values.end(), v.begin(), [](double d) { return static_cast<float>(d); });
    return Tensor({n, height, width}, std::move(v));
}

namespace {

struct Candidate {
    double value;
    std::int32_t source;
};

double dot_at(const Tensor& a, std::size_t pa, const Tensor& b, std::size_t pb) {
    const std::size_t C = a.dim(0), Pa = a.dim(1) * a.dim(2), Pb = b.dim(1) * b.dim(2);
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) acc += static_cast<double>(a[c * Pa + pa]) * b[c * Pb + pb];
    return acc;
}

double gate_value(const Tensor& gate, std::size_t q, GatePolarity polarity) {
    return polarity == GatePolarity::Foreground ? gate[q] : 1.0 - static_cast<double>(gate[q]);
}

void keep_top(std::vector<Candidate>& cands, ReferenceMatch& out, std::size_t p) {
    // Fill entries (source -1) take part in the sort as zeros that rank after
    // every real candidate of equal value.
    while (cands.size() < out.n) cands.push_back({0.0, -1});
    auto rank = [](const Candidate& c) {
        return c.source < 0 ? std::numeric_limits<std::int64_t>::max() : std::int64_t{c.source};
    };
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
        return a.value > b.value || (a.value == b.value && rank(a) < rank(b));
    });
    const std::size_t P = out.height * out.width;
    for (std::size_t r = 0; r < out.n && r < cands.size(); ++r) {
        out.values[r * P + p] = cands[r].value;
        out.source[r * P + p] = cands[r].source;
    }
}

ReferenceMatch blank(std::size_t n, std::size_t h, std::size_t w) {
    ReferenceMatch m;
    m.n = n;
    m.height = h;
    m.width = w;
    m.values.assign(n * h * w, 0.0);
    m.source.assign(n * h * w, -1);
    return m;
}

} // namespace

ReferenceMatch short_term_reference(const Tensor& cur, const Tensor& prev, const Tensor& gate, GatePolarity polarity,
                                    int k, int n) {
    const std::size_t H = cur.dim(1), W = cur.dim(2);
    ReferenceMatch out = blank(static_cast<std::size_t>(n), H, W);
    for (long i = 0; i < static_cast<long>(H); ++i)
        for (long j = 0; j < static_cast<long>(W); ++j) {
            std::vector<Candidate> cands;
            for (long dy = -k; dy <= k; ++dy)
                for (long dx = -k; dx <= k; ++dx) {
                    const long y = i + dy, x = j + dx;
                    if (y < 0 || x < 0 || y >= static_cast<long>(H) || x >= static_cast<long>(W)) continue;
                    const auto q = static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x);
                    const auto p = static_cast<std::size_t>(i) * W + static_cast<std::size_t>(j);
                    cands.push_back({dot_at(cur, p, prev, q) * gate_value(gate, q, polarity),
                                     static_cast<std::int32_t>(q)});
                }
            keep_top(cands, out, static_cast<std::size_t>(i) * W + static_cast<std::size_t>(j));
        }
    return out;
}

ReferenceMatch long_term_reference(const Tensor& cur, const Tensor& ref, const Tensor& gate, GatePolarity polarity,
                                   int n) {
    const std::size_t H = cur.dim(1), W = cur.dim(2), Q = ref.dim(1) * ref.dim(2);
    ReferenceMatch out = blank(static_cast<std::size_t>(n), H, W);
    for (std::size_t p = 0; p < H * W; ++p) {
        std::vector<Candidate> cands;
        for (std::size_t q = 0; q < Q; ++q)
            cands.push_back({dot_at(cur, p, ref, q) * gate_value(gate, q, polarity), static_cast<std::int32_t>(q)});
        keep_top(cands, out, p);
    }
    return out;
}

double focal_loss_reference(const std::vector<double>& p, const std::vector<double>& target, double gamma,
                            double alpha) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], 1e-7, 1.0 - 1e-7);
        const bool pos = target[i] > 0.5;
        const double pt = pos ? q : 1.0 - q;
        const double at = pos ? alpha : 1.0 - alpha;
        total += -at * std::pow(1.0 - pt, gamma) * std::log(pt);
    }
    return total / static_cast<double>(p.size());
}

double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, float scale) {
    std::normal_distribution<float> dist(0.0f, scale);
    Tensor t(shape);
    for (float& v : t.data()) v = dist(rng);
    return t;
}

Tensor random_unit_features(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng) {
    Tensor t = random_tensor({c, h, w}, rng);
    const std::size_t P = h * w;
    for (std::size_t p = 0; p < P; ++p) {
        double sq = 0.0;
        for (std::size_t i = 0; i < c; ++i) sq += static_cast<double>(t[i * P + p]) * t[i * P + p];
        const double norm = std::sqrt(sq);
        for (std::size_t i = 0; i < c; ++i) t[i * P + p] = static_cast<float>(t[i * P + p] / norm);
    }
    return t;
}

Tensor random_gate(std::size_t h, std::size_t w, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    Tensor t({1, h, w});
    for (float& v : t.data()) v = dist(rng);
    return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return INFINITY;
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

} // namespace lsmvos::check
