#include "lsmvos/error.hpp"
#include "lsmvos/model.hpp"
#include "lsmvos/parallel.hpp"
#include "lsmvos/pipeline.hpp"
#include "lsmvos/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace lsmvos;

namespace {

const Model& model32() {
    static const Model m = Model::from_weights(seeded_init(9, 32));
    return m;
}

PipelineConfig config32() {
    PipelineConfig c;
    c.match.n = 32;
    c.match.k = 3;
    return c;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("ablation configurations") {
    CHECK(AblationConfig::all_valid().size() == 7);
    CHECK(AblationConfig::all_valid().front() == AblationConfig{true, true, true});
    CHECK_THROWS_AS((AblationConfig{false, false, false}).validate(), ConfigError);
    CHECK_NOTHROW((AblationConfig{false, false, true}).validate());
    std::set<std::string> names;
    for (const auto& a : AblationConfig::all_valid()) names.insert(a.describe());
    CHECK(names.size() == 7);
}

TEST_CASE("merge_objects examples") {
    const Tensor hi({1, 2, 3}, 0.9f), lo({1, 2, 3}, 0.2f), tie({1, 2, 3}, 0.7f);
    const std::uint8_t id4[] = {4};
    const Tensor one[] = {hi};
    CHECK(merge_objects(one, id4, 0.5f) == LabelMap(3, 2, 4));
    const Tensor low2[] = {lo, lo};
    CHECK(merge_objects(low2, {}, 0.5f) == LabelMap(3, 2, 0));
    const Tensor ties[] = {tie, tie};
    CHECK(merge_objects(ties, {}, 0.5f) == LabelMap(3, 2, 1));
    const std::uint8_t ids[] = {2, 7};
    const Tensor mixed[] = {lo, tie};
    CHECK(merge_objects(mixed, ids, 0.5f) == LabelMap(3, 2, 7));
    CHECK_THROWS_AS(merge_objects(std::span<const Tensor>{}, {}, 0.5f), ConfigError);
    CHECK_THROWS_AS(merge_objects(one, {}, 1.0f), ConfigError);
}

TEST_CASE("init_session: object ids and rejections") {
    const SyntheticClip clip = make_synthetic_clip(64, 48, 1, 1, 3);
    const PropagationState s1 = init_session(clip.frames[0], clip.labels[0], model32(), config32());
    REQUIRE(s1.objects.size() == 1);
    CHECK(s1.objects[0].id == 1);
    CHECK(s1.ref_global.shape() == Shape{128, 6, 8});

    LabelMap sparse(64, 48);
    for (std::size_t x = 0; x < 10; ++x) {
        sparse.at(x, 3) = 1;
        sparse.at(x + 30, 30) = 3;
    }
    const PropagationState s2 = init_session(clip.frames[0], sparse, model32(), config32());
    REQUIRE(s2.objects.size() == 2);
    CHECK(s2.objects[0].id == 1);
    CHECK(s2.objects[1].id == 3);

    CHECK_THROWS_AS(init_session(clip.frames[0], LabelMap(64, 48), model32(), config32()), ConfigError);
    CHECK_THROWS_AS(init_session(clip.frames[0], LabelMap(64, 40, 1), model32(), config32()), ShapeError);
}

TEST_CASE("segment_frame: counters, state update, drift rejection") {
    const SyntheticClip clip = make_synthetic_clip(70, 50, 3, 2, 4);
    StageCounters init;
    PropagationState s = init_session(clip.frames[0], clip.labels[0], model32(), config32(), &init);
    CHECK(init.frames == 1);
    CHECK(init.shared_invocations == 1);
    CHECK(init.per_object_invocations == 0);
    const Tensor ref = s.ref_global;

    const FrameResult r = segment_frame(s, clip.frames[1], model32(), config32());
    CHECK(r.counters.frames == 1);
    CHECK(r.counters.shared_invocations == 1);
    CHECK(r.counters.per_object_invocations == 3);
    CHECK(r.probabilities.size() == 3);
    CHECK(r.labels.width == 70);
    CHECK(r.labels.height == 50);
    CHECK(s.frame_index == 1);
    CHECK(s.ref_global == ref);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.objects[i].prev_soft_mask == r.probabilities[i]);
    for (const auto& o : s.objects)
        for (float v : o.prev_soft_mask.data()) REQUIRE((v >= 0.0f && v <= 1.0f));

    CHECK_THROWS_AS(segment_frame(s, Image(72, 50), model32(), config32()), ShapeError);
    PipelineConfig wrong = config32();
    wrong.match.n = 16;
    CHECK_THROWS_AS(segment_frame(s, clip.frames[1], model32(), wrong), ConfigError);
}

TEST_CASE("run_sequence: echo, determinism, label set, counters") {
    const SyntheticClip clip = make_synthetic_clip(64, 56, 2, 4, 5);
    const SequenceResult single = run_sequence(std::span(clip.frames).first(1), clip.labels[0], model32(), config32());
    REQUIRE(single.labels.size() == 1);
    CHECK(single.labels[0] == clip.labels[0]);

    const SequenceResult a = run_sequence(clip.frames, clip.labels[0], model32(), config32());
    const SequenceResult b = run_sequence(clip.frames, clip.labels[0], model32(), config32());
    CHECK(a.labels == b.labels);
    CHECK(a.counters.frames == 4);
    CHECK(a.counters.shared_invocations == 4);
    CHECK(a.counters.per_object_invocations == 6);
    for (const auto& l : a.labels) {
        CHECK(l.width == 64);
        CHECK(l.height == 56);
        for (auto v : l.labels) REQUIRE(v <= 2);
    }
}

TEST_CASE("run_sequence: ablation without short-term matching or previous mask keeps output shape") {
    const SyntheticClip clip = make_synthetic_clip(48, 40, 1, 3, 6);
    PipelineConfig cfg = config32();
    cfg.ablation = {true, false, false};
    const SequenceResult r = run_sequence(clip.frames, clip.labels[0], model32(), cfg);
    REQUIRE(r.labels.size() == 3);
    for (const auto& l : r.labels) CHECK(l.labels.size() == 48u * 40u);
}

TEST_CASE("run_sequence: smoke run on a translating square keeps every mask nonempty") {
    const Model model = Model::from_weights(seeded_init(0));
    const SyntheticClip clip = make_synthetic_clip(128, 96, 1, 3, 0);
    const SequenceResult r = run_sequence(clip.frames, clip.labels[0], model, PipelineConfig{});
    REQUIRE(r.labels.size() == 3);
    for (const auto& l : r.labels) CHECK_FALSE(l.object_ids().empty());
}

TEST_CASE("run_sequence: output is independent of the thread count") {
    const SyntheticClip clip = make_synthetic_clip(64, 48, 2, 3, 7);
    const int saved = num_threads();
    set_num_threads(1);
    const SequenceResult a = run_sequence(clip.frames, clip.labels[0], model32(), config32());
    set_num_threads(5);
    const SequenceResult b = run_sequence(clip.frames, clip.labels[0], model32(), config32());
    set_num_threads(saved);
    CHECK(a.labels == b.labels);
}

}
