#include "lsmvos/decoder.hpp"
#include "lsmvos/error.hpp"
#include "lsmvos/model.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace lsmvos;
using lsmvos::check::max_abs_diff;
using lsmvos::check::random_gate;
using lsmvos::check::random_tensor;

namespace {

const Model& model8() {
    static const Model m = Model::from_weights(seeded_init(5, 8));
    return m;
}

Aic2dParams zero_bias(const Aic2dParams& p) {
    AicPass w = p.width(), h = p.height();
    w.bias = Tensor(w.bias.shape(), 0.0f);
    h.bias = Tensor(h.bias.shape(), 0.0f);
    return Aic2dParams(w, h);
}

DecoderInput random_input(std::size_t n, std::size_t h, std::size_t w, std::mt19937_64& rng) {
    return {random_tensor({n, h, w}, rng, 0.5f), random_tensor({n, h, w}, rng, 0.5f),
            random_tensor({n, h, w}, rng, 0.5f), random_tensor({n, h, w}, rng, 0.5f),
            GateMask(random_gate(h, w, rng)),    random_tensor({128, h, w}, rng)};
}

EncoderFeatures random_features(std::size_t h8, std::size_t w8, std::mt19937_64& rng) {
    return {random_tensor({32, h8 * 4, w8 * 4}, rng), random_tensor({64, h8 * 2, w8 * 2}, rng),
            random_tensor({128, h8, w8}, rng)};
}

} // namespace

TEST_SUITE("decoder") {

TEST_CASE("fuse: channel count, zero input, determinism, extents") {
    const auto& m = model8();
    CHECK(m.decoder.fuse.in_channels() == 4 * 8 + 1 + 128);
    CHECK(Model::from_weights(seeded_init(0)).decoder.fuse.in_channels() == 1153);

    DecoderWeights w = m.decoder;
    w.fuse.bias = Tensor(w.fuse.bias.shape(), 0.0f);
    w.fuse_aic = zero_bias(w.fuse_aic);
    const DecoderInput zero{Tensor({8, 6, 7}), Tensor({8, 6, 7}),           Tensor({8, 6, 7}),
                            Tensor({8, 6, 7}), GateMask::constant(6, 7, 0), Tensor({128, 6, 7})};
    const Tensor fused = fuse(zero, w);
    for (float v : fused.data()) REQUIRE(v == 0.0f);

    std::mt19937_64 rng(51);
    const DecoderInput in = random_input(8, 6, 7, rng);
    const Tensor a = fuse(in, m.decoder);
    CHECK(a.shape() == Shape{128, 6, 7});
    CHECK(a == fuse(in, m.decoder));

    DecoderInput bad = in;
    bad.l_bg = random_tensor({8, 6, 8}, rng);
    CHECK_THROWS_AS(fuse(bad, m.decoder), ShapeError);
}

TEST_CASE("refine: additive identities and stride relation") {
    std::mt19937_64 rng(52);
    RefineWeights w = model8().decoder.refine_s4;
    w.skip_aic = zero_bias(w.skip_aic);
    w.project.bias = Tensor(w.project.bias.shape(), 0.0f);

    const Tensor coarse = random_tensor({128, 5, 6}, rng), skip = random_tensor({64, 10, 12}, rng);
    const Tensor up = bilinear_resize(conv2d(coarse, w.project), {2, 1});
    CHECK(max_abs_diff(refine(Tensor({64, 10, 12}), coarse, w), up) < 1e-6);
    CHECK(max_abs_diff(refine(skip, Tensor({128, 5, 6}), w), aic2d(skip, w.skip_aic)) < 1e-6);
    CHECK(refine(skip, coarse, model8().decoder.refine_s4).shape() == Shape{64, 10, 12});
    CHECK_THROWS_AS(refine(random_tensor({64, 11, 12}, rng), coarse, w), ShapeError);
}

TEST_CASE("segment_head: sigmoid(0), crop contract, range") {
    const ConvSpec zero{Tensor({1, 32, 3, 3}, 0.0f), Tensor({1}, 0.0f), 1, 1, 1};
    std::mt19937_64 rng(53);
    const Tensor x = random_tensor({32, 12, 16}, rng);
    const Tensor half = segment_head(x, zero, {30, 21});
    CHECK(half.shape() == Shape{1, 21, 30});
    for (float v : half.data()) REQUIRE(v == 0.5f);

    ConvSpec loud = model8().decoder.head;
    for (auto& v : loud.kernel.data()) v *= 200.0f;
    const Tensor saturated = segment_head(x, loud, {32, 24});
    for (float v : saturated.data()) {
        REQUIRE(v > 0.0f);
        REQUIRE(v < 1.0f);
    }
    CHECK_THROWS_AS(segment_head(x, zero, CropRecord{}), ConfigError);
    CHECK_THROWS_AS(segment_head(x, zero, {40, 24}), ShapeError);
}

TEST_CASE("decode: 856x480 padded frame gives an 854x480 probability map") {
    std::mt19937_64 rng(54);
    const DecoderInput in = random_input(8, 60, 107, rng);
    const EncoderFeatures f = random_features(60, 107, rng);
    const Tensor p = decode(in, f, {854, 480}, model8().decoder);
    CHECK(p.shape() == Shape{1, 480, 854});
    for (float v : p.data()) {
        REQUIRE(v > 0.0f);
        REQUIRE(v < 1.0f);
    }
}

TEST_CASE("decode: zeroing an ablation input changes values but not shape or range") {
    std::mt19937_64 rng(55);
    const DecoderInput in = random_input(8, 4, 5, rng);
    const EncoderFeatures f = random_features(4, 5, rng);
    const CropRecord crop{37, 29};
    const Tensor base = decode(in, f, crop, model8().decoder);
    CHECK(base == decode(in, f, crop, model8().decoder));
    for (int which = 0; which < 3; ++which) {
        DecoderInput z = in;
        if (which == 0) z.g_fg = z.g_bg = Tensor({8, 4, 5});
        if (which == 1) z.l_fg = z.l_bg = Tensor({8, 4, 5});
        if (which == 2) z.prev_mask = GateMask::constant(4, 5, 0.0f);
        const Tensor out = decode(z, f, crop, model8().decoder);
        CHECK(out.shape() == base.shape());
        CHECK_FALSE(out == base);
        for (float v : out.data()) {
            REQUIRE(v > 0.0f);
            REQUIRE(v < 1.0f);
        }
    }
}

}
