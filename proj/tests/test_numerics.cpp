#include "lsmvos/error.hpp"
#include "lsmvos/numerics.hpp"
#include "lsmvos/parallel.hpp"
#include "lsmvos_check/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

using namespace lsmvos;
using lsmvos::check::max_abs_diff;
using lsmvos::check::random_tensor;

TEST_SUITE("numerics") {

TEST_CASE("conv2d: 1x1 identity kernel") {
    std::mt19937_64 rng(1);
    const Tensor x = random_tensor({1, 5, 7}, rng);
    const ConvSpec spec{Tensor({1, 1, 1, 1}, 1.0f), Tensor({1}, 0.0f), 1, 0, 0};
    CHECK(conv2d(x, spec) == x);
}

TEST_CASE("conv2d: all-ones 3x3 on constant input counts overlaps") {
    const ConvSpec spec{Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}, 0.0f), 1, 1, 1};
    const Tensor y = conv2d(Tensor({1, 6, 6}, 1.0f), spec);
    CHECK(y.at(0, 0, 0) == 4.0f);
    CHECK(y.at(0, 5, 5) == 4.0f);
    CHECK(y.at(0, 0, 3) == 6.0f);
    CHECK(y.at(0, 3, 3) == 9.0f);
}

TEST_CASE("conv2d: random 4x8x8 input with a 6x4x3x3 kernel matches the nested-loop oracle") {
    std::mt19937_64 rng(2);
    for (int draw = 0; draw < 200; ++draw) {
        const Tensor x = random_tensor({4, 8, 8}, rng);
        const ConvSpec spec{random_tensor({6, 4, 3, 3}, rng), random_tensor({6}, rng), 1 + draw % 2, draw % 3,
                            (draw / 3) % 2};
        REQUIRE(max_abs_diff(conv2d(x, spec), check::conv2d_reference(x, spec)) < 1e-5);
    }
}

TEST_CASE("conv2d: output extents, errors, and thread-count independence") {
    std::mt19937_64 rng(3);
    const ConvSpec spec{random_tensor({8, 3, 3, 3}, rng), random_tensor({8}, rng), 2, 1, 1};
    CHECK(spec.out_height(480) == 240);
    CHECK(spec.out_width(856) == 428);
    const Tensor x = random_tensor({3, 40, 50}, rng);
    const int saved = num_threads();
    set_num_threads(1);
    const Tensor one = conv2d(x, spec);
    set_num_threads(7);
    const Tensor many = conv2d(x, spec);
    set_num_threads(saved);
    CHECK(one == many);
    CHECK_THROWS_AS(conv2d(random_tensor({2, 8, 8}, rng), spec), ShapeError);
    const ConvSpec big{random_tensor({1, 3, 5, 5}, rng), Tensor(), 1, 0, 0};
    CHECK_THROWS_AS(conv2d(random_tensor({3, 3, 3}, rng), big), ShapeError);
}

TEST_CASE("bilinear_resize: identity, hand-evaluated row and constants") {
    std::mt19937_64 rng(4);
    const Tensor x = random_tensor({2, 5, 6}, rng);
    CHECK(bilinear_resize(x, {1, 1}) == x);

    const Tensor row = bilinear_resize(Tensor({1, 1, 2}, std::vector<float>{1.0f, 3.0f}), {2, 1});
    REQUIRE(row.shape() == Shape{1, 2, 4});
    CHECK(row.at(0, 0, 0) == doctest::Approx(1.0));
    CHECK(row.at(0, 0, 1) == doctest::Approx(1.5));
    CHECK(row.at(0, 0, 2) == doctest::Approx(2.5));
    CHECK(row.at(0, 0, 3) == doctest::Approx(3.0));

    for (Ratio f : {Ratio{2, 1}, Ratio{1, 8}, Ratio{3, 2}}) {
        const Tensor c = bilinear_resize(Tensor({1, 16, 24}, 0.7f), f);
        for (float v : c.data()) REQUIRE(v == 0.7f);
    }
    CHECK(bilinear_resize(Tensor({1, 16, 24}), {1, 8}).shape() == Shape{1, 2, 3});
    CHECK_THROWS_AS(bilinear_resize(x, {0, 1}), ConfigError);
}

TEST_CASE("l2_normalize_channels") {
    const Tensor v = l2_normalize_channels(Tensor({2, 1, 1}, std::vector<float>{3.0f, 4.0f}));
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
    CHECK(l2_normalize_channels(Tensor({4, 2, 2}, 0.0f)) == Tensor({4, 2, 2}, 0.0f));

    std::mt19937_64 rng(5);
    const Tensor r = l2_normalize_channels(random_tensor({16, 7, 9}, rng));
    for (std::size_t p = 0; p < r.plane(); ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < 16; ++c) s += double(r[c * r.plane() + p]) * r[c * r.plane() + p];
        REQUIRE(std::abs(std::sqrt(s) - 1.0) < 1e-5);
    }
}

TEST_CASE("topk_per_position and the tie rule") {
    const Tensor a = topk_per_position(Tensor({3, 1, 1}, std::vector<float>{3, 1, 2}), 2);
    CHECK(a.data()[0] == 3.0f);
    CHECK(a.data()[1] == 2.0f);
    const Tensor full = topk_per_position(Tensor({4, 1, 1}, std::vector<float>{0.5f, -1, 7, 2}), 4);
    CHECK(std::vector<float>(full.data().begin(), full.data().end()) == std::vector<float>{7, 2, 0.5f, -1});
    const Tensor pad = topk_per_position(Tensor({2, 1, 1}, std::vector<float>{-1, -2}), 4);
    CHECK(std::vector<float>(pad.data().begin(), pad.data().end()) == std::vector<float>{-1, -2, 0, 0});

    const std::vector<float> vals{5, 5, 1};
    std::vector<float> out(2);
    std::vector<std::int32_t> idx(2);
    CHECK(select_top_n(vals, 2, out, idx) == 2);
    CHECK(out == std::vector<float>{5, 5});
    CHECK(idx == std::vector<std::int32_t>{0, 1});
}

TEST_CASE("select_top_n agrees with a full stable sort") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> coarse(0, 9);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t len = 1 + trial % 40, n = 1 + (trial * 7) % 45;
        std::vector<float> v(len);
        for (auto& x : v) x = static_cast<float>(coarse(rng)); // many ties
        std::vector<std::int32_t> order(len);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
        std::vector<float> out(n);
        std::vector<std::int32_t> idx(n);
        const std::size_t got = select_top_n(v, n, out, idx);
        REQUIRE(got == std::min(n, len));
        for (std::size_t i = 0; i < got; ++i) {
            REQUIRE(idx[i] == order[i]);
            REQUIRE(out[i] == v[order[i]]);
        }
    }
}

TEST_CASE("focal_loss examples") {
    const FocalLossResult perfect = focal_loss(Tensor({1, 2, 2}, 1.0f), Tensor({1, 2, 2}, 1.0f));
    CHECK(perfect.loss == doctest::Approx(0.0).epsilon(1e-9));
    const FocalLossResult ce = focal_loss(Tensor({1, 1, 1}, 0.5f), Tensor({1, 1, 1}, 1.0f), 0.0f, 0.5f);
    CHECK(ce.loss == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(focal_loss(Tensor({1, 2, 2}), Tensor({1, 2, 3})), ShapeError);
    CHECK_THROWS_AS(focal_loss(Tensor({1, 1, 1}, 0.5f), Tensor({1, 1, 1}), 2.0f, 1.5f), ConfigError);
}

TEST_CASE("focal_loss matches the scalar oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Tensor p({1, 9, 9}), t({1, 9, 9});
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = u(rng);
        t[i] = u(rng) > 0.5f ? 1.0f : 0.0f;
    }
    const std::vector<double> pd(p.data().begin(), p.data().end()), td(t.data().begin(), t.data().end());
    CHECK(focal_loss(p, t).loss == doctest::Approx(check::focal_loss_reference(pd, td, 2.0, 0.25)).epsilon(1e-9));
}

TEST_CASE("elementwise primitives") {
    const Tensor a({2, 1, 2}, std::vector<float>{-1, 2, 0, -3});
    const Tensor b({2, 1, 2}, std::vector<float>{1, 1, 2, 2});
    CHECK(relu(a) == Tensor({2, 1, 2}, std::vector<float>{0, 2, 0, 0}));
    CHECK(add(a, b) == Tensor({2, 1, 2}, std::vector<float>{0, 3, 2, -1}));
    CHECK(multiply(a, b) == Tensor({2, 1, 2}, std::vector<float>{-1, 2, 0, -6}));
    CHECK(sigmoid(Tensor({1, 1, 1}, 0.0f))[0] == 0.5f);
    CHECK_THROWS_AS(add(a, Tensor({1, 1, 2})), ShapeError);

    const Tensor* parts[] = {&a, &b};
    const Tensor cat = concat_channels(parts);
    CHECK(cat.shape() == Shape{4, 1, 2});
    CHECK(cat.at(2, 0, 0) == 1.0f);

    const Tensor sm = softmax_channels(Tensor({3, 1, 1}, std::vector<float>{1000, 0, -1000}));
    CHECK(sm[0] == doctest::Approx(1.0));
    CHECK(sm[1] == doctest::Approx(0.0));

    const Tensor padded = zero_pad_to(a, 3, 4);
    CHECK(padded.shape() == Shape{2, 3, 4});
    CHECK(crop_to(padded, 1, 2) == a);
}

}
