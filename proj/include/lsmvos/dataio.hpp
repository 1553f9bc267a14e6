#pragma once

#include "lsmvos/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsmvos {

namespace fs = std::filesystem;

/// A DAVIS-layout sequence:
///   <root>/JPEGImages/<set>/<name>/<frame files>
///   <root>/Annotations/<set>/<name>/<index>.png
/// Annotations beyond frame 0 are optional.
struct SequenceHandle {
    std::string name;
    std::vector<fs::path> frames;
    std::vector<fs::path> annotations;
    std::size_t width = 0;
    std::size_t height = 0;

    /// Annotation whose file stem matches frame `index`, if any.
    std::optional<fs::path> annotation_for(std::size_t index) const;
};

SequenceHandle load_sequence(const fs::path& root, const std::string& set, const std::string& name);

/// Frames: PNG, binary PPM (P6, maxval 255), and JPEG when built with libjpeg.
Image read_image(const fs::path& path);
void write_png(const fs::path& path, const Image& image);
void write_ppm(const fs::path& path, const Image& image);

/// (width, height) from the file header without decoding pixels.
std::array<std::size_t, 2> image_extent(const fs::path& path);

bool jpeg_supported() noexcept;

/// Fixed 256-entry palette used for every written label map: the PASCAL VOC
/// bit-interleaved colour map that DAVIS annotations also use (id 0 black,
/// 1 = (128,0,0), 2 = (0,128,0), 3 = (128,128,0), ...).
const std::array<std::array<std::uint8_t, 3>, 256>& label_palette();

/// Indexed PNG -> label map (pixel value = object id). 8-bit grayscale files
/// are accepted as well; a grayscale file whose only values are {0, 255} is
/// read as a binary mask with 255 -> 1.
LabelMap read_label_map(const fs::path& path);

/// 8-bit palette PNG using label_palette().
void write_label_map(const fs::path& path, const LabelMap& labels);

} // namespace lsmvos
