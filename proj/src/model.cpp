#include "lsmvos/model.hpp"

#include "lsmvos/error.hpp"

#include <cmath>
#include <random>

namespace lsmvos {

namespace {

void add_conv(std::vector<ParamSpec>& out, const std::string& prefix, std::size_t k_out, std::size_t k_in,
              std::size_t kh, std::size_t kw) {
    const std::size_t fan = k_in * kh * kw;
    out.push_back({prefix + ".weight", {k_out, k_in, kh, kw}, fan});
    out.push_back({prefix + ".bias", {k_out}, fan});
}

void add_aic(std::vector<ParamSpec>& out, const std::string& prefix, std::size_t c_in, std::size_t c_out) {
    for (const char* axis : {"w", "h"}) {
        const bool width = axis[0] == 'w';
        const std::size_t in = width ? c_in : c_out;
        const std::string p = prefix + "." + axis;
        for (std::size_t size : kAicKernelSizes)
            out.push_back({p + ".k" + std::to_string(size),
                           width ? Shape{c_out, in, 1, size} : Shape{c_out, in, size, 1}, in * size});
        out.push_back({p + ".bias", {c_out}, in * 3});
        out.push_back({p + ".select.weight", {3, in, 1, 1}, in});
        out.push_back({p + ".select.bias", {3}, in});
    }
}

class Resolver {
public:
    explicit Resolver(const WeightsContainer& w, int n) : w_(w) {
        for (auto& spec : model_layout(n)) layout_.push_back(std::move(spec));
    }

    Tensor get(const std::string& name) const {
        for (const auto& spec : layout_)
            if (spec.name == name) {
                Tensor t = w_.get(name);
                if (t.shape() != spec.shape)
                    throw ShapeError("weights: entry '" + name + "' has shape " + shape_str(t.shape()) +
                                     ", expected " + shape_str(spec.shape));
                return t;
            }
        throw ConfigError("weights: '" + name + "' is not part of the model layout");
    }

    ConvSpec conv(const std::string& prefix, int stride, int pad) const {
        return ConvSpec{get(prefix + ".weight"), get(prefix + ".bias"), stride, pad, pad};
    }

    AicPass pass(const std::string& prefix, AicAxis axis) const {
        AicPass p;
        p.axis = axis;
        for (std::size_t s = 0; s < 3; ++s) p.kernels[s] = get(prefix + ".k" + std::to_string(kAicKernelSizes[s]));
        p.bias = get(prefix + ".bias");
        p.select_weight = get(prefix + ".select.weight");
        p.select_bias = get(prefix + ".select.bias");
        return p;
    }

    Aic2dParams aic(const std::string& prefix) const {
        return Aic2dParams(pass(prefix + ".w", AicAxis::Width), pass(prefix + ".h", AicAxis::Height));
    }

private:
    const WeightsContainer& w_;
    std::vector<ParamSpec> layout_;
};

} // namespace

std::vector<ParamSpec> model_layout(int n) {
    if (n < 1) throw ConfigError("model_layout: n must be >= 1");
    std::vector<ParamSpec> out;
    std::size_t c_in = 3;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t c = kEncoderChannels[s];
        const std::string p = "enc.s" + std::to_string(s + 1);
        add_conv(out, p + ".down", c, c_in, 3, 3);
        add_conv(out, p + ".res", c, c, 3, 3);
        c_in = c;
    }
    add_aic(out, "branch.global", kMatchChannels, kMatchChannels);
    add_aic(out, "branch.local", kMatchChannels, kMatchChannels);

    const std::size_t fused_in = 4 * static_cast<std::size_t>(n) + 1 + kEncoderChannels[2];
    add_conv(out, "dec.fuse", kDecoderChannels, fused_in, 1, 1);
    add_aic(out, "dec.fuse_aic", kDecoderChannels, kDecoderChannels);
    add_aic(out, "dec.refine_s4.skip", kEncoderChannels[1], kEncoderChannels[1]);
    add_conv(out, "dec.refine_s4.proj", kEncoderChannels[1], kDecoderChannels, 1, 1);
    add_aic(out, "dec.refine_s2.skip", kEncoderChannels[0], kEncoderChannels[0]);
    add_conv(out, "dec.refine_s2.proj", kEncoderChannels[0], kEncoderChannels[1], 1, 1);
    add_conv(out, "dec.head", 1, kEncoderChannels[0], 3, 3);
    return out;
}

WeightsContainer seeded_init(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    WeightsContainer w;
    for (const auto& spec : model_layout(n)) {
        const float scale = static_cast<float>(std::sqrt(3.0 / static_cast<double>(spec.fan_in)));
        Tensor t(spec.shape);
        for (float& v : t.data()) {
            const float u = static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
            v = (2.0f * u - 1.0f) * scale;
        }
        w.add(spec.name, t);
    }
    return w;
}

Model Model::from_weights(const WeightsContainer& weights) {
    const Tensor& fuse_w = weights.get("dec.fuse.weight");
    const std::size_t fixed = 1 + kEncoderChannels[2];
    if (fuse_w.rank() != 4 || fuse_w.dim(1) <= fixed || (fuse_w.dim(1) - fixed) % 4 != 0)
        throw ShapeError("weights: dec.fuse.weight shape " + shape_str(fuse_w.shape()) +
                         " does not encode a similarity channel count");
    Model m;
    m.n = static_cast<int>((fuse_w.dim(1) - fixed) / 4);
    const Resolver r(weights, m.n);
    for (std::size_t s = 0; s < 3; ++s) {
        const std::string p = "enc.s" + std::to_string(s + 1);
        m.encoder.stages[s] = {r.conv(p + ".down", 2, 1), r.conv(p + ".res", 1, 1)};
    }
    m.branches = {r.aic("branch.global"), r.aic("branch.local")};
    m.decoder.fuse = r.conv("dec.fuse", 1, 0);
    m.decoder.fuse_aic = r.aic("dec.fuse_aic");
    m.decoder.refine_s4 = {r.aic("dec.refine_s4.skip"), r.conv("dec.refine_s4.proj", 1, 0)};
    m.decoder.refine_s2 = {r.aic("dec.refine_s2.skip"), r.conv("dec.refine_s2.proj", 1, 0)};
    m.decoder.head = r.conv("dec.head", 1, 1);
    return m;
}

} // namespace lsmvos
