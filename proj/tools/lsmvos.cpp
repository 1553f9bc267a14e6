#include "lsmvos/bench.hpp"
#include "lsmvos/dataio.hpp"
#include "lsmvos/error.hpp"
#include "lsmvos/metrics.hpp"
#include "lsmvos/model.hpp"
#include "lsmvos/parallel.hpp"
#include "lsmvos/pipeline.hpp"
#include "lsmvos/weights.hpp"
#include "lsmvos_check/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& doc) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw lsmvos::IoError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

struct SegmentArgs {
    std::string data, set = "480p", seq, weights, out;
    std::optional<std::uint64_t> seed;
    bool disable_long = false, disable_short = false, disable_prev_mask = false;
    float theta = 0.5f;
    int k = 8, n = 256;
};

lsmvos::WeightsContainer resolve_weights(const std::string& path, const std::optional<std::uint64_t>& seed, int n) {
    if (!path.empty()) return lsmvos::load_weights(path);
    return lsmvos::seeded_init(seed.value_or(0), n);
}

int cmd_segment(const SegmentArgs& a) {
    using namespace lsmvos;
    PipelineConfig cfg;
    cfg.match.k = a.k;
    cfg.match.n = a.n;
    cfg.theta = a.theta;
    cfg.ablation = {!a.disable_long, !a.disable_short, !a.disable_prev_mask};
    cfg.validate();

    const SequenceHandle seq = load_sequence(a.data, a.set, a.seq);
    const WeightsContainer weights = resolve_weights(a.weights, a.seed, a.n);
    const Model model = Model::from_weights(weights);
    if (model.n != cfg.match.n)
        throw ConfigError("weights were built for n=" + std::to_string(model.n) + " but --n is " +
                          std::to_string(cfg.match.n));

    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const LabelMap first = read_label_map(*seq.annotation_for(0));
    StageCounters counters;
    PropagationState state = init_session(read_image(seq.frames[0]), first, model, cfg, &counters);
    write_label_map(out_dir / (seq.frames[0].stem().string() + ".png"), first);
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        FrameResult r = segment_frame(state, read_image(seq.frames[t]), model, cfg);
        counters += r.counters;
        write_label_map(out_dir / (seq.frames[t].stem().string() + ".png"), r.labels);
        std::cerr << "\rframe " << t + 1 << "/" << seq.frames.size() << std::flush;
    }
    std::cerr << "\n";
    const double elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json objects = json::array();
    for (const auto& o : state.objects) objects.push_back(o.id);
    json manifest{
        {"command", "segment"},
        {"sequence", seq.name},
        {"frames", seq.frames.size()},
        {"width", seq.width},
        {"height", seq.height},
        {"objects", objects},
        {"config",
         {{"k", cfg.match.k},
          {"n", cfg.match.n},
          {"theta", cfg.theta},
          {"use_long", cfg.ablation.use_long},
          {"use_short", cfg.ablation.use_short},
          {"use_prev_mask", cfg.ablation.use_prev_mask},
          {"weights", a.weights.empty() ? json(nullptr) : json(a.weights)},
          {"seed", a.weights.empty() ? json(a.seed.value_or(0)) : json(nullptr)},
          {"weights_checksum", weights.checksum()},
          {"threads", num_threads()}}},
        {"counters", counters.to_json()},
        {"elapsed_ms", elapsed},
    };
    write_json(out_dir / "run_manifest.json", manifest);
    std::cout << "wrote " << seq.frames.size() << " masks to " << out_dir.string() << " (" << elapsed << " ms)\n";
    return 0;
}

std::map<std::string, fs::path> png_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw lsmvos::IoError("not a directory: " + dir.string());
    std::map<std::string, fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files[e.path().stem().string()] = e.path();
    return files;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& report_path) {
    using namespace lsmvos;
    const auto t0 = std::chrono::steady_clock::now();
    const auto gt = png_files(gt_dir);
    const auto pred = png_files(pred_dir);
    if (gt.empty()) throw IoError("no annotations in " + gt_dir);

    std::vector<std::string> stems;
    for (const auto& [stem, path] : gt) stems.push_back(stem);
    const LabelMap first = read_label_map(gt.begin()->second);
    const std::vector<std::uint8_t> ids = first.object_ids();
    if (ids.empty()) throw ConfigError("first annotation " + gt.begin()->second.string() + " has no objects");

    // The annotated first frame and the last frame are left out, as in the
    // benchmark tooling. Two-frame sequences keep the second frame.
    std::size_t begin = 1, end = stems.size() > 2 ? stems.size() - 1 : stems.size();
    if (begin >= end) throw ConfigError("need at least two annotated frames to evaluate");

    std::vector<FrameScore> scores;
    for (std::size_t i = begin; i < end; ++i) {
        const auto it = pred.find(stems[i]);
        if (it == pred.end()) throw IoError("missing prediction for frame " + stems[i] + " in " + pred_dir);
        const LabelMap g = read_label_map(gt.at(stems[i]));
        const LabelMap p = read_label_map(it->second);
        if (g.width != p.width || g.height != p.height)
            throw ShapeError("extent mismatch for frame " + stems[i]);
        const std::size_t tol = default_boundary_tolerance(g.width, g.height);
        for (std::uint8_t id : ids) {
            const BinaryMask gm = BinaryMask::from_labels(g, id), pm = BinaryMask::from_labels(p, id);
            scores.push_back({region_similarity(pm, gm), contour_accuracy(pm, gm, tol), i, id});
        }
    }
    EvalReport report = aggregate(scores);
    report.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    json doc = report.to_json();
    doc["frames_evaluated"] = end - begin;
    if (!report_path.empty()) write_json(report_path, doc);

    std::printf("%-6s %8s %8s %8s %8s %8s %8s\n", "object", "J mean", "J rec", "J decay", "F mean", "F rec",
                "F decay");
    for (const auto& [id, o] : report.objects)
        std::printf("%-6d %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", id, o.j.mean, o.j.recall, o.j.decay, o.f.mean,
                    o.f.recall, o.f.decay);
    std::printf("J&F mean %.4f (J %.4f, F %.4f)\n", report.jf_mean, report.j_mean, report.f_mean);
    return 0;
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
    static const std::regex re(R"((\d+)[xX](\d+))");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw lsmvos::ConfigError("--size expects WxH, got '" + s + "'");
    return {std::stoul(m[1]), std::stoul(m[2])};
}

int cmd_bench(lsmvos::BenchOptions o, const std::string& size, const std::string& sweep_size,
              const std::string& manifest) {
    std::tie(o.width, o.height) = parse_size(size);
    if (!sweep_size.empty()) std::tie(o.sweep_width, o.sweep_height) = parse_size(sweep_size);
    const lsmvos::BenchReport report = lsmvos::run_benchmark(o, &std::cout);
    if (!manifest.empty()) {
        json doc = report.to_json();
        doc["command"] = "bench";
        doc["threads"] = lsmvos::num_threads();
        write_json(manifest, doc);
    }
    return 0;
}

int cmd_selftest(std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = lsmvos::check::run_selftest(&std::cout, seed);
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << results.size() - failed << "/" << results.size() << " checks passed in " << s << " s\n";
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lsmvos: semi-supervised video object segmentation by feature matching"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: LSMVOS_THREADS or hardware concurrency)")
        ->check(CLI::NonNegativeNumber);

    SegmentArgs seg;
    auto* segment = app.add_subcommand("segment", "Propagate the first-frame annotation through a sequence");
    segment->add_option("--data", seg.data, "Dataset root (JPEGImages/, Annotations/)")->required();
    segment->add_option("--set", seg.set, "Resolution set")->capture_default_str();
    segment->add_option("--seq", seg.seq, "Sequence name")->required();
    auto* wopt = segment->add_option("--weights", seg.weights, "Weights container");
    segment->add_option("--seed", seg.seed, "Seed for generated weights (default 0)")->excludes(wopt);
    segment->add_option("--out", seg.out, "Output directory")->required();
    segment->add_flag("--disable-long", seg.disable_long, "Zero the long-term similarity maps");
    segment->add_flag("--disable-short", seg.disable_short, "Zero the short-term similarity maps");
    segment->add_flag("--disable-prev-mask", seg.disable_prev_mask, "Zero the previous-mask decoder input");
    segment->add_option("--theta", seg.theta, "Background threshold")->capture_default_str();
    segment->add_option("--k", seg.k, "Short-term window radius")->capture_default_str();
    segment->add_option("--n", seg.n, "Similarity channels")->capture_default_str();

    std::string pred, gt, report;
    auto* eval = app.add_subcommand("eval", "Score predicted masks against annotations");
    eval->add_option("--pred", pred, "Directory of predicted PNG masks")->required();
    eval->add_option("--gt", gt, "Directory of annotation PNG masks")->required();
    eval->add_option("--report", report, "Write the JSON report here");

    lsmvos::BenchOptions bo;
    std::string size = "854x480", sweep_size, manifest;
    auto* bench = app.add_subcommand("bench", "Time the pipeline on procedural clips");
    bench->add_option("--size", size, "Frame size WxH")->capture_default_str();
    bench->add_option("--objects", bo.objects, "Objects in the main run")->capture_default_str();
    bench->add_option("--frames", bo.frames, "Frames in the main run")->capture_default_str();
    bench->add_option("--seed", bo.seed, "Seed for weights and clip")->capture_default_str();
    bench->add_option("--sweep", bo.sweep, "Object counts for the scaling table (empty: skip)")->expected(0, -1);
    bool no_sweep = false;
    bench->add_flag("--no-sweep", no_sweep, "Skip the object-count scaling runs");
    bench->add_option("--sweep-frames", bo.sweep_frames, "Frames per scaling run")->capture_default_str();
    bench->add_option("--sweep-size", sweep_size, "Frame size for the scaling runs (default: --size)");
    bench->add_flag_callback("--no-micro", [&bo] { bo.micro = false; }, "Skip the matching micro-benchmarks");
    bench->add_option("--manifest", manifest, "Write the JSON report here");

    std::uint64_t st_seed = 2024;
    auto* selftest = app.add_subcommand("selftest", "Oracle-equivalence and gradient checks");
    selftest->add_option("--seed", st_seed, "Seed for the random instances")->capture_default_str();

    std::uint64_t iw_seed = 0;
    int iw_n = 256;
    std::string iw_out;
    auto* init_weights = app.add_subcommand("init-weights", "Write a seeded weights container");
    init_weights->add_option("--seed", iw_seed, "Seed for the weight draws")->capture_default_str();
    init_weights->add_option("--n", iw_n, "Similarity channels")->capture_default_str();
    init_weights->add_option("--out", iw_out, "Output container path")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (threads > 0) lsmvos::set_num_threads(static_cast<std::size_t>(threads));
        if (*segment) return cmd_segment(seg);
        if (*eval) return cmd_eval(pred, gt, report);
        if (*bench) {
            if (no_sweep) bo.sweep.clear();
            return cmd_bench(bo, size, sweep_size, manifest);
        }
        if (*selftest) return cmd_selftest(st_seed);
        if (*init_weights) {
            lsmvos::save_weights(lsmvos::seeded_init(iw_seed, iw_n), iw_out);
            std::cout << "wrote " << iw_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
