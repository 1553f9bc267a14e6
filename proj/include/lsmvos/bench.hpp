#pragma once

#include "lsmvos/matching.hpp"
#include "lsmvos/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace lsmvos {

struct BenchOptions {
    std::size_t width = 854;
    std::size_t height = 480;
    std::size_t objects = 1;
    std::size_t frames = 10;
    std::uint64_t seed = 0;
    MatchConfig match;

    // Object-count sweep; an empty list skips it. Zero extents reuse width/height.
    std::vector<std::size_t> sweep{1, 2, 4, 8};
    std::size_t sweep_frames = 3;
    std::size_t sweep_width = 0;
    std::size_t sweep_height = 0;

    bool micro = true;
    std::size_t micro_reps = 3;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ScalingPoint {
    std::size_t objects = 0;
    double frame_ms = 0.0; // best segment_frame wall time over the run
    StageCounters counters;
};

struct BenchReport {
    BenchOptions options;
    StageCounters counters;     // main run, including the first frame
    double mean_frame_ms = 0.0; // segment_frame calls only
    double fps = 0.0;
    std::vector<ScalingPoint> scaling;
    LinearFit scaling_fit;
    double micro_short_ms = 0.0;
    double micro_long_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Runs the pipeline on a procedural clip with seeded weights. Progress and
/// the summary tables go to `log` when non-null.
BenchReport run_benchmark(const BenchOptions& options, std::ostream* log = nullptr);

} // namespace lsmvos
