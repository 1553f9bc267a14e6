#include "lsmvos/encoder.hpp"
#include "lsmvos/error.hpp"
#include "lsmvos/model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace lsmvos;
using lsmvos::check::random_tensor;

namespace {

const Model& seeded_model() {
    static const Model m = Model::from_weights(seeded_init(3));
    return m;
}

} // namespace

TEST_SUITE("encoder") {

TEST_CASE("pad_to_multiple") {
    const PaddedImage p = pad_to_multiple(Image(854, 480));
    CHECK(p.image.width == 856);
    CHECK(p.image.height == 480);
    CHECK(p.crop == CropRecord{854, 480});
    Image square(64, 64);
    square.pixel(5, 7)[1] = 200;
    const PaddedImage same = pad_to_multiple(square);
    CHECK(same.image == square);
    CHECK_THROWS_AS(pad_to_multiple(Image(1, 1)), ShapeError);

    Image odd(9, 10);
    odd.pixel(8, 9)[0] = 77;
    const PaddedImage q = pad_to_multiple(odd);
    CHECK(q.image.width == 16);
    CHECK(q.image.pixel(8, 9)[0] == 77);
    CHECK(q.image.pixel(15, 15)[0] == 0);
}

TEST_CASE("normalize_frame applies the pixel statistics") {
    Image img(8, 8);
    img.pixel(0, 0)[0] = 255;
    const Tensor t = normalize_frame(img);
    CHECK(t.shape() == Shape{3, 8, 8});
    CHECK(t.at(0, 0, 0) == doctest::Approx((1.0 - 0.485) / 0.229));
    CHECK(t.at(2, 3, 3) == doctest::Approx(-0.406 / 0.225));
}

TEST_CASE("encode: stride arithmetic on 856x480") {
    std::mt19937_64 rng(21);
    const EncoderFeatures f = encode(random_tensor({3, 480, 856}, rng), seeded_model().encoder);
    CHECK(f.s2.shape() == Shape{32, 240, 428});
    CHECK(f.s4.shape() == Shape{64, 120, 214});
    CHECK(f.s8.shape() == Shape{128, 60, 107});
    const MatchFeatures m = branch(f, seeded_model().branches);
    CHECK(m.global_feat.shape() == Shape{128, 60, 107});
    CHECK(m.local_feat.shape() == Shape{128, 60, 107});
}

TEST_CASE("encode: determinism and unpadded input rejection") {
    std::mt19937_64 rng(22);
    const Tensor x = random_tensor({3, 32, 40}, rng);
    const EncoderFeatures a = encode(x, seeded_model().encoder), b = encode(x, seeded_model().encoder);
    CHECK(a.s2 == b.s2);
    CHECK(a.s8 == b.s8);
    CHECK_THROWS_AS(encode(random_tensor({3, 30, 40}, rng), seeded_model().encoder), ShapeError);
}

TEST_CASE("encode: all-zero frame with zero biases gives all-zero features") {
    EncoderWeights w = seeded_model().encoder;
    for (auto& stage : w.stages) {
        stage.down.bias = Tensor({stage.down.out_channels()}, 0.0f);
        stage.residual.bias = Tensor({stage.residual.out_channels()}, 0.0f);
    }
    const EncoderFeatures f = encode(Tensor({3, 24, 32}, 0.0f), w);
    for (const Tensor* t : {&f.s2, &f.s4, &f.s8})
        for (float v : t->data()) REQUIRE(v == 0.0f);
}

TEST_CASE("branch: distinct branches, unit norms, raw mode") {
    std::mt19937_64 rng(23);
    const EncoderFeatures f = encode(random_tensor({3, 48, 64}, rng), seeded_model().encoder);
    const MatchFeatures m = branch(f, seeded_model().branches);
    CHECK_FALSE(m.global_feat == m.local_feat);
    for (const Tensor* t : {&m.global_feat, &m.local_feat}) {
        for (std::size_t p = 0; p < t->plane(); ++p) {
            double s = 0.0;
            for (std::size_t c = 0; c < t->channels(); ++c) s += double((*t)[c * t->plane() + p]) * (*t)[c * t->plane() + p];
            REQUIRE((s == 0.0 || std::abs(std::sqrt(s) - 1.0) < 1e-5));
        }
    }
    const MatchFeatures raw = branch(f, seeded_model().branches, false);
    CHECK_FALSE(raw.global_feat == m.global_feat);
}

}
