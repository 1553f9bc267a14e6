#include "lsmvos/error.hpp"
#include "lsmvos/model.hpp"
#include "lsmvos/weights.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace lsmvos;
namespace fs = std::filesystem;

TEST_SUITE("weights") {

TEST_CASE("container add/get and ascending offsets") {
    WeightsContainer w;
    w.add("a", Tensor({2, 3}, 1.0f));
    w.add("b", Tensor({4}, 2.0f));
    CHECK(w.contains("a"));
    CHECK_FALSE(w.contains("c"));
    CHECK(w.get("b") == Tensor({4}, 2.0f));
    CHECK(w.entry("a").shape == Shape{2, 3});
    CHECK(w.entry("b").offset == 24);
    CHECK_THROWS_AS(w.add("a", Tensor({1})), ConfigError);
    CHECK_THROWS_AS(w.get("c"), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
    const std::uint8_t a[] = {'a'};
    CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
    const std::uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
    CHECK(fnv1a64(foobar) == 0x85944171f73967e8ULL);
}

TEST_CASE("save/load is bit exact; corruption is rejected") {
    const fs::path dir = test::scratch_dir("weights");
    const WeightsContainer w = seeded_init(17, 16);
    save_weights(w, dir / "w.lsmw");
    const WeightsContainer back = load_weights(dir / "w.lsmw");
    CHECK(back == w);
    CHECK(back.checksum() == w.checksum());

    std::ifstream in(dir / "w.lsmw", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    CHECK(bytes.substr(0, 4) == "LSMW");

    std::ofstream(dir / "trunc.lsmw", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
    try {
        load_weights(dir / "trunc.lsmw");
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }

    std::string flipped = bytes;
    flipped[flipped.size() - 3] ^= 0x10;
    std::ofstream(dir / "flip.lsmw", std::ios::binary) << flipped;
    CHECK_THROWS_AS(load_weights(dir / "flip.lsmw"), IoError);

    std::string magic = bytes;
    magic[0] = 'X';
    std::ofstream(dir / "magic.lsmw", std::ios::binary) << magic;
    CHECK_THROWS_AS(load_weights(dir / "magic.lsmw"), IoError);

    std::string version = bytes;
    version[4] = 9;
    std::ofstream(dir / "version.lsmw", std::ios::binary) << version;
    CHECK_THROWS_AS(load_weights(dir / "version.lsmw"), IoError);
    CHECK_THROWS_AS(load_weights(dir / "missing.lsmw"), IoError);
}

TEST_CASE("seeded_init: determinism, seed sensitivity, fan-in scaling") {
    const WeightsContainer a = seeded_init(1), b = seeded_init(1), c = seeded_init(2);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    const auto layout = model_layout();
    REQUIRE(layout.size() == a.entries().size());
    for (const auto& spec : layout) {
        const Tensor t = a.get(spec.name);
        REQUIRE(t.shape() == spec.shape);
        REQUIRE(t.all_finite());
        if (t.size() < 200) continue; // too few samples for a stable estimate
        double s = 0.0, s2 = 0.0;
        for (float v : t.data()) {
            s += v;
            s2 += double(v) * v;
        }
        const double mean = s / t.size();
        const double sd = std::sqrt(s2 / t.size() - mean * mean);
        const double want = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
        INFO(spec.name);
        REQUIRE(std::abs(sd - want) < 0.2 * want);
    }
}

TEST_CASE("Model::from_weights validates names and shapes") {
    const Model m = Model::from_weights(seeded_init(4, 24));
    CHECK(m.n == 24);
    WeightsContainer missing;
    missing.add("enc.s1.down.weight", Tensor({32, 3, 3, 3}));
    CHECK_THROWS_AS(Model::from_weights(missing), ConfigError);
}

}
