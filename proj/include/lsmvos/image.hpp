#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lsmvos {

/// Interleaved 8-bit RGB image.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb; // height * width * 3

    Image() = default;
    Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

    std::uint8_t* pixel(std::size_t x, std::size_t y) { return rgb.data() + (y * width + x) * 3; }
    const std::uint8_t* pixel(std::size_t x, std::size_t y) const { return rgb.data() + (y * width + x) * 3; }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Indexed mask: 0 is background, any other value an object id.
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> labels; // height * width

    LabelMap() = default;
    LabelMap(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), labels(w * h, fill) {}

    std::uint8_t& at(std::size_t x, std::size_t y) { return labels[y * width + x]; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }

    /// Sorted distinct nonzero ids.
    std::vector<std::uint8_t> object_ids() const;

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Original extents of a frame before padding; a zero extent means "missing".
struct CropRecord {
    std::size_t width = 0;
    std::size_t height = 0;

    bool valid() const noexcept { return width > 0 && height > 0; }
    friend bool operator==(const CropRecord&, const CropRecord&) = default;
};

struct PaddedImage {
    Image image;
    CropRecord crop;
};

/// Zero-pads right and bottom until both extents are multiples of `multiple`.
/// Rejects frames smaller than `multiple` on either axis.
PaddedImage pad_to_multiple(const Image& frame, std::size_t multiple = 8);

} // namespace lsmvos
