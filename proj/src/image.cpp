#include "lsmvos/image.hpp"

#include "lsmvos/error.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace lsmvos {

std::vector<std::uint8_t> LabelMap::object_ids() const {
    std::array<bool, 256> seen{};
    for (auto v : labels) seen[v] = true;
    std::vector<std::uint8_t> ids;
    for (std::size_t i = 1; i < seen.size(); ++i)
        if (seen[i]) ids.push_back(static_cast<std::uint8_t>(i));
    return ids;
}

PaddedImage pad_to_multiple(const Image& frame, std::size_t multiple) {
    if (multiple == 0) throw ConfigError("pad_to_multiple: multiple must be >= 1");
    if (frame.width < multiple || frame.height < multiple)
        throw ShapeError("pad_to_multiple: frame " + std::to_string(frame.width) + "x" +
                         std::to_string(frame.height) + " is smaller than " + std::to_string(multiple) + "x" +
                         std::to_string(multiple));
    if (frame.rgb.size() != frame.width * frame.height * 3)
        throw ShapeError("pad_to_multiple: pixel buffer does not match extents");

    const auto round_up = [multiple](std::size_t v) { return (v + multiple - 1) / multiple * multiple; };
    PaddedImage out{Image(round_up(frame.width), round_up(frame.height)), {frame.width, frame.height}};
    for (std::size_t y = 0; y < frame.height; ++y)
        std::copy_n(frame.pixel(0, y), frame.width * 3, out.image.pixel(0, y));
    return out;
}

} // namespace lsmvos
