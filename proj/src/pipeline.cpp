#include "lsmvos/pipeline.hpp"

#include "lsmvos/error.hpp"

#include <chrono>

namespace lsmvos {

namespace {

class Stopwatch {
public:
    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct SharedFeatures {
    EncoderFeatures encoder;
    MatchFeatures match;
};

SharedFeatures shared_stage(const Image& frame, const Model& model, const PipelineConfig& cfg,
                            StageCounters& counters) {
    Stopwatch sw;
    const PaddedImage padded = pad_to_multiple(frame, kFeatureStride);
    SharedFeatures out;
    out.encoder = encode(normalize_frame(padded.image), model.encoder);
    counters.encode_ms += sw.lap_ms();
    out.match = branch(out.encoder, model.branches, cfg.normalize_features);
    counters.branch_ms += sw.lap_ms();
    counters.shared_invocations += 1;
    return out;
}

Tensor binary_mask(const LabelMap& labels, std::uint8_t id) {
    Tensor m({1, labels.height, labels.width});
    for (std::size_t i = 0; i < labels.labels.size(); ++i) m[i] = labels.labels[i] == id ? 1.0f : 0.0f;
    return m;
}

GateMask gate_from(const Tensor& mask, const PropagationState& state) {
    return downsample_mask(zero_pad_to(mask, state.padded_height, state.padded_width), kFeatureStride);
}

} // namespace

void AblationConfig::validate() const {
    if (!use_long && !use_short && !use_prev_mask)
        throw ConfigError("ablation: long-term matching, short-term matching and the previous mask cannot all be "
                          "disabled");
}

std::string AblationConfig::describe() const {
    if (use_long && use_short && use_prev_mask) return "full model";
    std::string removed;
    auto append = [&](const char* part) {
        if (!removed.empty()) removed += " and ";
        removed += part;
    };
    if (!use_long) append("long-term matching");
    if (!use_short) append("short-term matching");
    if (!use_prev_mask) append("mask");
    return removed + " removed";
}

std::vector<AblationConfig> AblationConfig::all_valid() {
    std::vector<AblationConfig> out;
    for (int bits = 7; bits >= 1; --bits) out.push_back({(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
    return out;
}

void PipelineConfig::validate() const {
    match.validate();
    ablation.validate();
    if (!(theta > 0.0f && theta < 1.0f)) throw ConfigError("theta must lie in (0, 1)");
}

StageCounters& StageCounters::operator+=(const StageCounters& o) {
    frames += o.frames;
    shared_invocations += o.shared_invocations;
    per_object_invocations += o.per_object_invocations;
    encode_ms += o.encode_ms;
    branch_ms += o.branch_ms;
    long_ms += o.long_ms;
    short_ms += o.short_ms;
    decode_ms += o.decode_ms;
    merge_ms += o.merge_ms;
    shared_ms += o.shared_ms;
    per_object_ms += o.per_object_ms;
    total_ms += o.total_ms;
    return *this;
}

nlohmann::json StageCounters::to_json() const {
    return {{"frames", frames},
            {"shared_invocations", shared_invocations},
            {"per_object_invocations", per_object_invocations},
            {"ms",
             {{"encode", encode_ms},
              {"branch", branch_ms},
              {"long_term_match", long_ms},
              {"short_term_match", short_ms},
              {"decode", decode_ms},
              {"merge", merge_ms},
              {"shared", shared_ms},
              {"per_object", per_object_ms},
              {"total", total_ms}}}};
}

PropagationState init_session(const Image& frame0, const LabelMap& labels0, const Model& model,
                              const PipelineConfig& cfg, StageCounters* counters) {
    cfg.validate();
    if (labels0.width != frame0.width || labels0.height != frame0.height)
        throw ShapeError("init_session: label map " + std::to_string(labels0.width) + "x" +
                         std::to_string(labels0.height) + " does not match frame " + std::to_string(frame0.width) +
                         "x" + std::to_string(frame0.height));
    const auto ids = labels0.object_ids();
    if (ids.empty()) throw ConfigError("init_session: first-frame label map contains no objects");

    StageCounters local;
    Stopwatch total;
    const SharedFeatures shared = shared_stage(frame0, model, cfg, local);
    local.shared_ms = local.encode_ms + local.branch_ms;

    PropagationState state;
    state.crop = {frame0.width, frame0.height};
    state.padded_width = shared.encoder.s2.width() * 2;
    state.padded_height = shared.encoder.s2.height() * 2;
    state.ref_global = shared.match.global_feat;
    state.prev_local = shared.match.local_feat;
    for (auto id : ids) {
        Tensor mask = binary_mask(labels0, id);
        GateMask gate = gate_from(mask, state);
        state.objects.push_back({id, std::move(gate), std::move(mask)});
    }
    local.frames = 1;
    local.total_ms = total.lap_ms();
    if (counters) *counters += local;
    return state;
}

FrameResult segment_frame(PropagationState& state, const Image& frame, const Model& model, const PipelineConfig& cfg) {
    cfg.validate();
    if (state.objects.empty() || state.ref_global.empty()) throw ConfigError("segment_frame: session not initialized");
    if (frame.width != state.crop.width || frame.height != state.crop.height)
        throw ShapeError("segment_frame: frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                         " differs from first frame " + std::to_string(state.crop.width) + "x" +
                         std::to_string(state.crop.height));

    FrameResult result;
    StageCounters& c = result.counters;
    Stopwatch total;
    const SharedFeatures shared = shared_stage(frame, model, cfg, c);
    c.shared_ms = c.encode_ms + c.branch_ms;

    const Tensor& cur_global = shared.match.global_feat;
    const Tensor& cur_local = shared.match.local_feat;
    const std::size_t H8 = cur_local.height(), W8 = cur_local.width();
    const auto n = static_cast<std::size_t>(cfg.match.n);
    if (static_cast<int>(n) != model.n)
        throw ConfigError("segment_frame: match config n=" + std::to_string(n) + " but weights were built for n=" +
                          std::to_string(model.n));
    const Tensor zero_map({n, H8, W8});

    Stopwatch per_object;
    for (ObjectState& obj : state.objects) {
        Stopwatch sw;
        const GateMask prev_gate = gate_from(obj.prev_soft_mask, state);
        DecoderInput in;
        if (cfg.ablation.use_long) {
            auto [fg, bg] = long_term_match_pair(cur_global, state.ref_global, obj.ref_gate, cfg.match);
            in.g_fg = std::move(fg.similarity);
            in.g_bg = std::move(bg.similarity);
        } else {
            in.g_fg = in.g_bg = zero_map;
        }
        c.long_ms += sw.lap_ms();
        if (cfg.ablation.use_short) {
            auto [fg, bg] = short_term_match_pair(cur_local, state.prev_local, prev_gate, cfg.match);
            in.l_fg = std::move(fg.similarity);
            in.l_bg = std::move(bg.similarity);
        } else {
            in.l_fg = in.l_bg = zero_map;
        }
        c.short_ms += sw.lap_ms();
        in.prev_mask = cfg.ablation.use_prev_mask ? prev_gate : GateMask::constant(H8, W8, 0.0f);
        in.feat_s8 = shared.encoder.s8;
        result.probabilities.push_back(decode(in, shared.encoder, state.crop, model.decoder));
        c.decode_ms += sw.lap_ms();
        c.per_object_invocations += 1;
    }
    c.per_object_ms = per_object.lap_ms();

    Stopwatch merge;
    std::vector<std::uint8_t> ids;
    for (const auto& obj : state.objects) ids.push_back(obj.id);
    result.labels = merge_objects(result.probabilities, ids, cfg.theta);
    c.merge_ms = merge.lap_ms();

    state.prev_local = cur_local;
    for (std::size_t i = 0; i < state.objects.size(); ++i) state.objects[i].prev_soft_mask = result.probabilities[i];
    state.frame_index += 1;
    c.frames = 1;
    c.total_ms = total.lap_ms();
    return result;
}

LabelMap merge_objects(std::span<const Tensor> probabilities, std::span<const std::uint8_t> ids, float theta) {
    if (probabilities.empty()) throw ConfigError("merge_objects: at least one object probability map is required");
    if (!ids.empty() && ids.size() != probabilities.size())
        throw ConfigError("merge_objects: " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(probabilities.size()) + " probability maps");
    if (!(theta > 0.0f && theta < 1.0f)) throw ConfigError("merge_objects: theta must lie in (0, 1)");
    const Tensor& first = probabilities[0];
    if (first.rank() != 3 || first.channels() != 1)
        throw ShapeError("merge_objects: probability maps must be 1×H×W, got " + shape_str(first.shape()));
    for (const Tensor& p : probabilities) require_same_shape(first, p, "merge_objects");
    if (probabilities.size() > 255) throw ConfigError("merge_objects: at most 255 objects");

    LabelMap out(first.width(), first.height());
    for (std::size_t i = 0; i < first.size(); ++i) {
        float best = probabilities[0][i];
        std::size_t arg = 0;
        for (std::size_t k = 1; k < probabilities.size(); ++k)
            if (probabilities[k][i] > best) {
                best = probabilities[k][i];
                arg = k;
            }
        if (best >= theta) out.labels[i] = ids.empty() ? static_cast<std::uint8_t>(arg + 1) : ids[arg];
    }
    return out;
}

SequenceResult run_sequence(std::span<const Image> frames, const LabelMap& first, const Model& model,
                            const PipelineConfig& cfg) {
    if (frames.empty()) throw ConfigError("run_sequence: no frames");
    SequenceResult out;
    PropagationState state = init_session(frames[0], first, model, cfg, &out.counters);
    out.labels.push_back(first);
    for (std::size_t t = 1; t < frames.size(); ++t) {
        FrameResult r = segment_frame(state, frames[t], model, cfg);
        out.counters += r.counters;
        out.labels.push_back(std::move(r.labels));
    }
    return out;
}

} // namespace lsmvos
