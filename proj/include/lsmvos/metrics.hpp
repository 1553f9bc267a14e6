#pragma once

#include "lsmvos/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace lsmvos {

/// Binary mask: nonzero = foreground.
struct BinaryMask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    BinaryMask() = default;
    BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h, 0) {}

    static BinaryMask from_labels(const LabelMap& labels, std::uint8_t id);

    std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Intersection over union; 1 when both masks are empty.
double region_similarity(const BinaryMask& pred, const BinaryMask& gt);

/// Foreground pixels with at least one 4-neighbour that is background or
/// outside the image.
BinaryMask boundary_map(const BinaryMask& mask);

/// ceil(0.008 * image diagonal).
std::size_t default_boundary_tolerance(std::size_t width, std::size_t height);

/// Boundary F-measure. A boundary pixel counts as matched when the other
/// boundary has a pixel within Chebyshev distance `tol` (square dilation).
double contour_accuracy(const BinaryMask& pred, const BinaryMask& gt, std::size_t tol);

struct SequenceStats {
    double mean = 0.0;
    double recall = 0.0; // fraction of frames with score > 0.5
    double decay = 0.0;  // mean of first ceil(T/4) frames minus mean of last ceil(T/4)
};

SequenceStats sequence_stats(std::span<const double> scores);

struct FrameScore {
    double j = 0.0;
    double f = 0.0;
    std::size_t frame = 0;
    std::uint8_t object = 0;
};

struct ObjectReport {
    SequenceStats j;
    SequenceStats f;
    std::size_t frames = 0;
};

struct EvalReport {
    std::map<std::uint8_t, ObjectReport> objects;
    double j_mean = 0.0;
    double f_mean = 0.0;
    double jf_mean = 0.0;
    double elapsed_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Groups scores per object (in frame order), computes the statistics, and
/// averages the per-object means.
EvalReport aggregate(std::span<const FrameScore> scores);

} // namespace lsmvos
