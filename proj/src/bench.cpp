#include "lsmvos/bench.hpp"

#include "lsmvos/error.hpp"
#include "lsmvos/model.hpp"
#include "lsmvos/numerics.hpp"
#include "lsmvos/parallel.hpp"
#include "lsmvos/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

namespace lsmvos {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need at least two paired samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_line: x values are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

namespace {

struct RunStats {
    StageCounters counters;
    double mean_ms = 0.0;
    double best_ms = 0.0;
};

RunStats run_clip(std::size_t width, std::size_t height, std::size_t objects, std::size_t frames, std::uint64_t seed,
                  const Model& model, const PipelineConfig& cfg) {
    const SyntheticClip clip = make_synthetic_clip(width, height, objects, frames, seed);
    RunStats stats;
    PropagationState state = init_session(clip.frames[0], clip.labels[0], model, cfg, &stats.counters);
    double sum = 0.0;
    stats.best_ms = 0.0;
    for (std::size_t t = 1; t < frames; ++t) {
        const FrameResult r = segment_frame(state, clip.frames[t], model, cfg);
        stats.counters += r.counters;
        sum += r.counters.total_ms;
        stats.best_ms = t == 1 ? r.counters.total_ms : std::min(stats.best_ms, r.counters.total_ms);
    }
    stats.mean_ms = sum / static_cast<double>(frames - 1);
    return stats;
}

template <class F>
double best_of(std::size_t reps, F&& f) {
    double best = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        best = r == 0 ? ms : std::min(best, ms);
    }
    return best;
}

Tensor random_features(std::size_t c, std::size_t h, std::size_t w, std::mt19937_64& rng) {
    std::normal_distribution<float> dist;
    Tensor t({c, h, w});
    for (float& v : t.data()) v = dist(rng);
    return l2_normalize_channels(t);
}

} // namespace

BenchReport run_benchmark(const BenchOptions& options, std::ostream* log) {
    if (options.frames < 2) throw ConfigError("bench: --frames must be at least 2");
    if (options.objects < 1) throw ConfigError("bench: --objects must be at least 1");
    options.match.validate();

    BenchReport report;
    report.options = options;
    const Model model = Model::from_weights(seeded_init(options.seed, options.match.n));
    PipelineConfig cfg;
    cfg.match = options.match;

    if (log)
        *log << "bench: " << options.width << "x" << options.height << ", K=" << options.objects << ", "
             << options.frames << " frames, threads=" << num_threads() << "\n";
    const RunStats main = run_clip(options.width, options.height, options.objects, options.frames, options.seed,
                                   model, cfg);
    report.counters = main.counters;
    report.mean_frame_ms = main.mean_ms;
    report.fps = main.mean_ms > 0.0 ? 1000.0 / main.mean_ms : 0.0;

    if (log) {
        const auto& c = report.counters;
        const double per_frame = static_cast<double>(c.frames);
        *log << std::fixed << std::setprecision(2) << "  stage               mean ms/frame\n"
             << "  encode              " << c.encode_ms / per_frame << "\n"
             << "  branch              " << c.branch_ms / per_frame << "\n"
             << "  long_term_match     " << c.long_ms / std::max(per_frame - 1, 1.0) << "\n"
             << "  short_term_match    " << c.short_ms / std::max(per_frame - 1, 1.0) << "\n"
             << "  decode              " << c.decode_ms / std::max(per_frame - 1, 1.0) << "\n"
             << "  frame (end to end)  " << report.mean_frame_ms << "\n"
             << "  FPS                 " << report.fps << "\n";
    }

    if (!options.sweep.empty()) {
        const std::size_t sw = options.sweep_width ? options.sweep_width : options.width;
        const std::size_t sh = options.sweep_height ? options.sweep_height : options.height;
        std::vector<double> xs, ys;
        if (log) *log << "  K-scaling at " << sw << "x" << sh << " (" << options.sweep_frames << " frames)\n"
                      << "  K    frame ms    shared invocations    frames\n";
        for (std::size_t k : options.sweep) {
            const RunStats s = run_clip(sw, sh, k, std::max<std::size_t>(options.sweep_frames, 2), options.seed,
                                        model, cfg);
            report.scaling.push_back({k, s.best_ms, s.counters});
            xs.push_back(static_cast<double>(k));
            ys.push_back(s.best_ms);
            if (log)
                *log << "  " << std::setw(2) << k << "   " << std::setw(9) << s.best_ms << "    " << std::setw(18)
                     << s.counters.shared_invocations << "    " << s.counters.frames << "\n";
        }
        if (xs.size() >= 2) {
            report.scaling_fit = fit_line(xs, ys);
            if (log)
                *log << "  fit: frame_ms = " << report.scaling_fit.intercept << " + " << report.scaling_fit.slope
                     << " * K   (R^2 = " << std::setprecision(4) << report.scaling_fit.r2 << ")\n"
                     << std::setprecision(2);
        }
    }

    if (options.micro) {
        const std::size_t h8 = (options.height + kFeatureStride - 1) / kFeatureStride;
        const std::size_t w8 = (options.width + kFeatureStride - 1) / kFeatureStride;
        std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
        const Tensor cur = random_features(kMatchChannels, h8, w8, rng);
        const Tensor prev = random_features(kMatchChannels, h8, w8, rng);
        Tensor gate_values({1, h8, w8});
        std::uniform_real_distribution<float> u(0.0f, 1.0f);
        for (float& v : gate_values.data()) v = u(rng);
        const GateMask gate(gate_values);
        report.micro_short_ms =
            best_of(options.micro_reps, [&] { (void)short_term_match_pair(cur, prev, gate, options.match); });
        report.micro_long_ms =
            best_of(options.micro_reps, [&] { (void)long_term_match_pair(cur, prev, gate, options.match); });
        if (log)
            *log << "  micro (" << kMatchChannels << "x" << h8 << "x" << w8 << ", k=" << options.match.k
                 << ", n=" << options.match.n << ", fg+bg): short_term_match " << report.micro_short_ms
                 << " ms, long_term_match " << report.micro_long_ms << " ms\n";
    }
    return report;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json scaling_json = nlohmann::json::array();
    for (const auto& p : scaling)
        scaling_json.push_back({{"objects", p.objects}, {"frame_ms", p.frame_ms}, {"counters", p.counters.to_json()}});
    return {{"command", "bench"},
            {"config",
             {{"width", options.width},
              {"height", options.height},
              {"objects", options.objects},
              {"frames", options.frames},
              {"seed", options.seed},
              {"k", options.match.k},
              {"n", options.match.n},
              {"threads", num_threads()}}},
            {"counters", counters.to_json()},
            {"mean_frame_ms", mean_frame_ms},
            {"fps", fps},
            {"scaling",
             {{"points", scaling_json},
              {"fit", {{"slope_ms", scaling_fit.slope}, {"intercept_ms", scaling_fit.intercept}, {"r2", scaling_fit.r2}}}}},
            {"micro", {{"short_term_match_ms", micro_short_ms}, {"long_term_match_ms", micro_long_ms}}}};
}

} // namespace lsmvos
