#include "lsmvos/synthetic.hpp"

#include "lsmvos/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lsmvos {

namespace {

struct Square {
    double x, y, vx, vy;
    std::size_t side;
    std::uint8_t color_a[3], color_b[3];
    std::size_t cell;
};

} // namespace

SyntheticClip make_synthetic_clip(std::size_t width, std::size_t height, std::size_t objects, std::size_t frames,
                                  std::uint64_t seed) {
    if (width < 16 || height < 16) throw ConfigError("synthetic clip must be at least 16x16");
    if (objects < 1 || objects > 255) throw ConfigError("synthetic clip needs 1..255 objects");
    if (frames < 1) throw ConfigError("synthetic clip needs at least one frame");

    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    const std::size_t side = std::max<std::size_t>(4, std::min(width, height) / 5);
    std::vector<Square> squares(objects);
    for (auto& s : squares) {
        s.side = side;
        s.x = uniform(0.0, static_cast<double>(width - side));
        s.y = uniform(0.0, static_cast<double>(height - side));
        const double speed = uniform(1.5, 4.0), angle = uniform(0.0, 6.283185307179586);
        s.vx = speed * std::cos(angle);
        s.vy = speed * std::sin(angle);
        for (int c = 0; c < 3; ++c) {
            s.color_a[c] = static_cast<std::uint8_t>(uniform(40.0, 255.0));
            s.color_b[c] = static_cast<std::uint8_t>(uniform(0.0, 200.0));
        }
        s.cell = std::max<std::size_t>(2, side / 4);
    }

    Image background(width, height);
    std::uniform_int_distribution<int> noise(-12, 12);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            std::uint8_t* px = background.pixel(x, y);
            const double gx = static_cast<double>(x) / static_cast<double>(width);
            const double gy = static_cast<double>(y) / static_cast<double>(height);
            const int base[3] = {static_cast<int>(60 + 80 * gx), static_cast<int>(90 + 60 * gy),
                                 static_cast<int>(120 - 40 * gx * gy)};
            for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>(std::clamp(base[c] + noise(rng), 0, 255));
        }

    SyntheticClip clip;
    for (std::size_t t = 0; t < frames; ++t) {
        Image frame = background;
        LabelMap labels(width, height);
        for (std::size_t k = 0; k < objects; ++k) {
            const Square& s = squares[k];
            const auto x0 = static_cast<std::size_t>(std::lround(s.x));
            const auto y0 = static_cast<std::size_t>(std::lround(s.y));
            for (std::size_t y = y0; y < std::min(height, y0 + s.side); ++y)
                for (std::size_t x = x0; x < std::min(width, x0 + s.side); ++x) {
                    const bool odd = (((x - x0) / s.cell) + ((y - y0) / s.cell)) % 2 == 1;
                    std::copy_n(odd ? s.color_a : s.color_b, 3, frame.pixel(x, y));
                    labels.at(x, y) = static_cast<std::uint8_t>(k + 1);
                }
        }
        clip.frames.push_back(std::move(frame));
        clip.labels.push_back(std::move(labels));

        for (auto& s : squares) {
            const double max_x = static_cast<double>(width - s.side), max_y = static_cast<double>(height - s.side);
            s.x += s.vx;
            s.y += s.vy;
            if (s.x < 0.0 || s.x > max_x) {
                s.vx = -s.vx;
                s.x = std::clamp(s.x, 0.0, max_x);
            }
            if (s.y < 0.0 || s.y > max_y) {
                s.vy = -s.vy;
                s.y = std::clamp(s.y, 0.0, max_y);
            }
        }
    }
    return clip;
}

} // namespace lsmvos
