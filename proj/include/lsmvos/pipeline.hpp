#pragma once

#include "lsmvos/image.hpp"
#include "lsmvos/matching.hpp"
#include "lsmvos/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lsmvos {

/// Which decoder inputs are live. Disabled paths are fed zeros of the right
/// shape so one parameter set serves every configuration.
struct AblationConfig {
    bool use_long = true;
    bool use_short = true;
    bool use_prev_mask = true;

    /// Rejects the all-disabled configuration.
    void validate() const;
    std::string describe() const;

    /// The seven valid combinations, full model first.
    static std::vector<AblationConfig> all_valid();

    friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

struct PipelineConfig {
    MatchConfig match;
    AblationConfig ablation;
    float theta = 0.5f;            // background threshold in merge_objects
    bool normalize_features = true; // false: raw dot-product matching

    void validate() const;
};

/// Invocation counts and wall time per stage. Shared stages (pad, encode,
/// branch) run once per frame; per-object stages (long/short matching,
/// decode) once per object per frame.
struct StageCounters {
    std::size_t frames = 0;
    std::size_t shared_invocations = 0;
    std::size_t per_object_invocations = 0;
    double encode_ms = 0.0;
    double branch_ms = 0.0;
    double long_ms = 0.0;
    double short_ms = 0.0;
    double decode_ms = 0.0;
    double merge_ms = 0.0;
    double shared_ms = 0.0;
    double per_object_ms = 0.0;
    double total_ms = 0.0;

    StageCounters& operator+=(const StageCounters& other);
    nlohmann::json to_json() const;
};

struct ObjectState {
    std::uint8_t id = 0;
    GateMask ref_gate;      // first-frame mask at stride 8, fixed
    Tensor prev_soft_mask;  // 1×H₀×W₀ probabilities from the previous frame
};

/// Temporal memory carried between frames. ref_global is shared by all
/// objects (every object references the same first frame) and never changes
/// after init_session; prev_local is replaced every frame.
struct PropagationState {
    CropRecord crop;
    std::size_t padded_width = 0;
    std::size_t padded_height = 0;
    std::size_t frame_index = 0;
    Tensor ref_global;
    Tensor prev_local;
    std::vector<ObjectState> objects;
};

/// Encodes the annotated first frame and seeds per-object state from its
/// label map. Rejects label maps without objects or with mismatched extents.
PropagationState init_session(const Image& frame0, const LabelMap& labels0, const Model& model,
                              const PipelineConfig& cfg, StageCounters* counters = nullptr);

struct FrameResult {
    LabelMap labels;
    std::vector<Tensor> probabilities; // per object, in state.objects order
    StageCounters counters;
};

FrameResult segment_frame(PropagationState& state, const Image& frame, const Model& model, const PipelineConfig& cfg);

/// Per pixel: the id with the highest probability if it reaches theta, else 0.
/// Ties go to the earlier (lower) id. `ids` defaults to 1..K when empty.
LabelMap merge_objects(std::span<const Tensor> probabilities, std::span<const std::uint8_t> ids, float theta);

struct SequenceResult {
    std::vector<LabelMap> labels; // labels[0] echoes the given annotation
    StageCounters counters;
};

SequenceResult run_sequence(std::span<const Image> frames, const LabelMap& first, const Model& model,
                            const PipelineConfig& cfg);

} // namespace lsmvos
