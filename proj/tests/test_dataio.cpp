#include "lsmvos/dataio.hpp"
#include "lsmvos/error.hpp"
#include "lsmvos/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <fstream>

using namespace lsmvos;
namespace fs = std::filesystem;

namespace {

void write_clip(const fs::path& root, const std::string& name, const SyntheticClip& clip, std::size_t annotated) {
    const fs::path frames = root / "JPEGImages" / "480p" / name, annos = root / "Annotations" / "480p" / name;
    fs::create_directories(frames);
    fs::create_directories(annos);
    char stem[16];
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
        std::snprintf(stem, sizeof stem, "%05zu", t);
        write_png(frames / (std::string(stem) + ".png"), clip.frames[t]);
        if (t < annotated) write_label_map(annos / (std::string(stem) + ".png"), clip.labels[t]);
    }
}

} // namespace

TEST_SUITE("dataio") {

TEST_CASE("palette follows the bit-interleaved VOC map") {
    const auto& p = label_palette();
    CHECK(p[0] == std::array<std::uint8_t, 3>{0, 0, 0});
    CHECK(p[1] == std::array<std::uint8_t, 3>{128, 0, 0});
    CHECK(p[2] == std::array<std::uint8_t, 3>{0, 128, 0});
    CHECK(p[3] == std::array<std::uint8_t, 3>{128, 128, 0});
    CHECK(p[4] == std::array<std::uint8_t, 3>{0, 0, 128});
    CHECK(p[255] == std::array<std::uint8_t, 3>{224, 224, 192});
}

TEST_CASE("label map round trip") {
    const fs::path dir = test::scratch_dir("labels");
    LabelMap m(23, 17);
    for (std::size_t i = 0; i < m.labels.size(); ++i) m.labels[i] = static_cast<std::uint8_t>((i * 37) % 256);
    write_label_map(dir / "a.png", m);
    CHECK(read_label_map(dir / "a.png") == m);

    LabelMap two(8, 8);
    two.at(1, 1) = 1;
    two.at(5, 6) = 2;
    write_label_map(dir / "b.png", two);
    CHECK(read_label_map(dir / "b.png").object_ids() == std::vector<std::uint8_t>{1, 2});
    write_label_map(dir / "zero.png", LabelMap(8, 8));
    CHECK(read_label_map(dir / "zero.png").object_ids().empty());
}

TEST_CASE("grayscale {0,255} masks read as binary labels") {
    const fs::path dir = test::scratch_dir("gray");
    auto write_gray = [](const fs::path& path, const std::vector<std::uint8_t>& px, std::size_t w, std::size_t h) {
        png_image img{};
        img.version = PNG_IMAGE_VERSION;
        img.width = static_cast<png_uint_32>(w);
        img.height = static_cast<png_uint_32>(h);
        img.format = PNG_FORMAT_GRAY;
        REQUIRE(png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr));
    };
    std::vector<std::uint8_t> binary(6 * 4, 0);
    for (std::size_t x = 0; x < 3; ++x) binary[6 + x] = 255;
    write_gray(dir / "binary.png", binary, 6, 4);
    const LabelMap b = read_label_map(dir / "binary.png");
    CHECK(b.object_ids() == std::vector<std::uint8_t>{1});
    CHECK(b.at(2, 1) == 1);
    CHECK(b.at(3, 1) == 0);

    std::vector<std::uint8_t> ids(6 * 4, 0);
    ids[0] = 2;
    ids[5] = 255;
    write_gray(dir / "ids.png", ids, 6, 4);
    CHECK(read_label_map(dir / "ids.png").object_ids() == std::vector<std::uint8_t>{2, 255});

    Image rgb(6, 4);
    write_png(dir / "rgb.png", rgb);
    CHECK_THROWS_AS(read_label_map(dir / "rgb.png"), IoError);
}

TEST_CASE("image round trips through PNG and PPM") {
    const fs::path dir = test::scratch_dir("images");
    const SyntheticClip clip = make_synthetic_clip(33, 21, 1, 1, 1);
    write_png(dir / "f.png", clip.frames[0]);
    write_ppm(dir / "f.ppm", clip.frames[0]);
    CHECK(read_image(dir / "f.png") == clip.frames[0]);
    CHECK(read_image(dir / "f.ppm") == clip.frames[0]);
    CHECK(image_extent(dir / "f.png") == std::array<std::size_t, 2>{33, 21});
    CHECK(image_extent(dir / "f.ppm") == std::array<std::size_t, 2>{33, 21});
    CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
    std::ofstream(dir / "junk.png") << "not a png";
    CHECK_THROWS_AS(read_image(dir / "junk.png"), IoError);
    CHECK_THROWS_AS(read_label_map(dir / "junk.png"), IoError);
    CHECK_THROWS_AS(read_image(dir / "f.tiff"), IoError);
}

TEST_CASE("load_sequence: fixture, sparse annotations, errors") {
    const fs::path root = test::scratch_dir("davis");
    const SyntheticClip clip = make_synthetic_clip(40, 32, 2, 3, 2);
    write_clip(root, "toy", clip, 1);
    const SequenceHandle h = load_sequence(root, "480p", "toy");
    CHECK(h.name == "toy");
    CHECK(h.frames.size() == 3);
    CHECK(h.annotations.size() == 1);
    CHECK(h.width == 40);
    CHECK(h.height == 32);
    CHECK(h.annotation_for(0).has_value());
    CHECK_FALSE(h.annotation_for(2).has_value());
    CHECK(read_label_map(*h.annotation_for(0)) == clip.labels[0]);

    fs::create_directories(root / "JPEGImages" / "480p" / "empty");
    fs::create_directories(root / "Annotations" / "480p" / "empty");
    try {
        load_sequence(root, "480p", "empty");
        FAIL("expected an error");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("empty") != std::string::npos);
    }

    write_clip(root, "noanno", clip, 0);
    CHECK_THROWS_AS(load_sequence(root, "480p", "noanno"), IoError);

    write_clip(root, "mixed", clip, 1);
    write_png(root / "JPEGImages" / "480p" / "mixed" / "00003.png", Image(41, 32));
    CHECK_THROWS_AS(load_sequence(root, "480p", "mixed"), IoError);
    CHECK_THROWS_AS(load_sequence(root, "480p", "absent"), IoError);
}

}
