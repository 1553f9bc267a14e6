#include "lsmvos/dataio.hpp"
#include "lsmvos/error.hpp"
#include "lsmvos/matching.hpp"
#include "lsmvos/metrics.hpp"
#include "lsmvos/model.hpp"
#include "lsmvos/numerics.hpp"
#include "lsmvos/parallel.hpp"
#include "lsmvos/pipeline.hpp"
#include "lsmvos/synthetic.hpp"
#include "lsmvos/weights.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace lsmvos;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const FloatArray& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(shape, std::vector<float>(a.data(), a.data() + a.size()));
}

py::array_t<float> to_array(const Tensor& t) {
    py::array_t<float> out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::memcpy(out.mutable_data(), t.ptr(), t.size() * sizeof(float));
    return out;
}

Tensor as_gate_tensor(const FloatArray& a) {
    Tensor t = to_tensor(a);
    return t.rank() == 2 ? t.reshaped({1, t.dim(0), t.dim(1)}) : t;
}

GatePolarity polarity(const std::string& p) {
    if (p == "fg" || p == "foreground") return GatePolarity::Foreground;
    if (p == "bg" || p == "background") return GatePolarity::Background;
    throw ConfigError("polarity must be 'fg' or 'bg', got '" + p + "'");
}

MatchConfig match_config(int k, int n) {
    MatchConfig c;
    c.k = k;
    c.n = n;
    c.validate();
    return c;
}

py::tuple match_to_py(const MatchResult& r) {
    py::array_t<std::int32_t> src(std::vector<py::ssize_t>(r.similarity.shape().begin(), r.similarity.shape().end()));
    std::memcpy(src.mutable_data(), r.source.data(), r.source.size() * sizeof(std::int32_t));
    return py::make_tuple(to_array(r.similarity), src);
}

MatchResult match_from_py(const FloatArray& sim, const py::array_t<std::int32_t, py::array::c_style>& src) {
    MatchResult r;
    r.similarity = to_tensor(sim);
    r.source.assign(src.data(), src.data() + src.size());
    return r;
}

Image to_image(const ByteArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ShapeError("frames must be H×W×3 uint8 arrays");
    Image img(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    std::memcpy(img.rgb.data(), a.data(), img.rgb.size());
    return img;
}

py::array_t<std::uint8_t> from_image(const Image& img) {
    py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(img.height), static_cast<py::ssize_t>(img.width),
                                   static_cast<py::ssize_t>(3)});
    std::memcpy(out.mutable_data(), img.rgb.data(), img.rgb.size());
    return out;
}

LabelMap to_labels(const ByteArray& a) {
    if (a.ndim() != 2) throw ShapeError("label maps must be H×W uint8 arrays");
    LabelMap m(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    std::memcpy(m.labels.data(), a.data(), m.labels.size());
    return m;
}

py::array_t<std::uint8_t> from_labels(const LabelMap& m) {
    py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(m.height), static_cast<py::ssize_t>(m.width)});
    std::memcpy(out.mutable_data(), m.labels.data(), m.labels.size());
    return out;
}

BinaryMask to_mask(const ByteArray& a) {
    if (a.ndim() != 2) throw ShapeError("masks must be H×W arrays");
    BinaryMask m(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.size(); ++i) m.pixels[i] = a.data()[i] != 0;
    return m;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

} // namespace

PYBIND11_MODULE(_lsmvos, m) {
    m.doc() = "Feature-matching video object segmentation core";

    // Translators registered later are tried first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("num_threads", &num_threads);
    m.def("set_num_threads", &set_num_threads, py::arg("n"));

    // numerics
    m.def(
        "conv2d",
        [](const FloatArray& x, const FloatArray& kernel, std::optional<FloatArray> bias, int stride, int pad) {
            const ConvSpec spec{to_tensor(kernel), bias ? to_tensor(*bias) : Tensor(), stride, pad, pad};
            const Tensor in = to_tensor(x);
            Tensor out;
            {
                py::gil_scoped_release nogil;
                out = conv2d(in, spec);
            }
            return to_array(out);
        },
        py::arg("x"), py::arg("kernel"), py::arg("bias") = py::none(), py::arg("stride") = 1, py::arg("pad") = 0);
    m.def(
        "bilinear_resize",
        [](const FloatArray& x, std::int64_t num, std::int64_t den) {
            return to_array(bilinear_resize(to_tensor(x), {num, den}));
        },
        py::arg("x"), py::arg("num"), py::arg("den") = 1);
    m.def(
        "l2_normalize_channels", [](const FloatArray& x) { return to_array(l2_normalize_channels(to_tensor(x))); },
        py::arg("x"));
    m.def(
        "topk_per_position",
        [](const FloatArray& x, std::size_t n) { return to_array(topk_per_position(to_tensor(x), n)); },
        py::arg("x"), py::arg("n"));
    m.def(
        "focal_loss",
        [](const FloatArray& p, const FloatArray& target, float gamma, float alpha) {
            const FocalLossResult r = focal_loss(to_tensor(p), to_tensor(target), gamma, alpha);
            return py::make_tuple(r.loss, to_array(r.grad));
        },
        py::arg("p"), py::arg("target"), py::arg("gamma") = kFocalGamma, py::arg("alpha") = kFocalAlpha);

    // matching
    m.def(
        "downsample_mask",
        [](const FloatArray& mask, std::size_t stride) {
            return to_array(downsample_mask(as_gate_tensor(mask), stride).values());
        },
        py::arg("mask"), py::arg("stride") = 8);
    m.def(
        "short_term_match",
        [](const FloatArray& cur, const FloatArray& prev, const FloatArray& gate, int k, int n,
           const std::string& pol) {
            const Tensor c = to_tensor(cur), p = to_tensor(prev);
            const GateMask g(as_gate_tensor(gate));
            MatchResult r;
            {
                py::gil_scoped_release nogil;
                r = short_term_match(c, p, g, polarity(pol), match_config(k, n));
            }
            return match_to_py(r);
        },
        py::arg("cur"), py::arg("prev"), py::arg("gate"), py::arg("k") = 8, py::arg("n") = 256,
        py::arg("polarity") = "fg");
    m.def(
        "long_term_match",
        [](const FloatArray& cur, const FloatArray& ref, const FloatArray& gate, int n, const std::string& pol) {
            const Tensor c = to_tensor(cur), r0 = to_tensor(ref);
            const GateMask g(as_gate_tensor(gate));
            MatchResult r;
            {
                py::gil_scoped_release nogil;
                r = long_term_match(c, r0, g, polarity(pol), match_config(0, n));
            }
            return match_to_py(r);
        },
        py::arg("cur"), py::arg("ref"), py::arg("gate"), py::arg("n") = 256, py::arg("polarity") = "fg");
    m.def(
        "short_term_match_backward",
        [](const FloatArray& upstream, const FloatArray& cur, const FloatArray& prev, const FloatArray& gate,
           const FloatArray& sim, const py::array_t<std::int32_t, py::array::c_style>& src, const std::string& pol) {
            const MatchGradients g = short_term_match_backward(to_tensor(upstream), to_tensor(cur), to_tensor(prev),
                                                               GateMask(as_gate_tensor(gate)), polarity(pol),
                                                               match_from_py(sim, src));
            return py::make_tuple(to_array(g.cur), to_array(g.other));
        },
        py::arg("upstream"), py::arg("cur"), py::arg("prev"), py::arg("gate"), py::arg("similarity"),
        py::arg("source"), py::arg("polarity") = "fg");
    m.def(
        "long_term_match_backward",
        [](const FloatArray& upstream, const FloatArray& cur, const FloatArray& ref, const FloatArray& gate,
           const FloatArray& sim, const py::array_t<std::int32_t, py::array::c_style>& src, const std::string& pol) {
            const MatchGradients g = long_term_match_backward(to_tensor(upstream), to_tensor(cur), to_tensor(ref),
                                                              GateMask(as_gate_tensor(gate)), polarity(pol),
                                                              match_from_py(sim, src));
            return py::make_tuple(to_array(g.cur), to_array(g.other));
        },
        py::arg("upstream"), py::arg("cur"), py::arg("ref"), py::arg("gate"), py::arg("similarity"),
        py::arg("source"), py::arg("polarity") = "fg");

    // metrics
    m.def(
        "region_similarity",
        [](const ByteArray& pred, const ByteArray& gt) { return region_similarity(to_mask(pred), to_mask(gt)); },
        py::arg("pred"), py::arg("gt"));
    m.def(
        "contour_accuracy",
        [](const ByteArray& pred, const ByteArray& gt, std::optional<std::size_t> tol) {
            const BinaryMask p = to_mask(pred), g = to_mask(gt);
            return contour_accuracy(p, g, tol.value_or(default_boundary_tolerance(g.width, g.height)));
        },
        py::arg("pred"), py::arg("gt"), py::arg("tol") = py::none());
    m.def(
        "sequence_stats",
        [](const std::vector<double>& scores) {
            const SequenceStats s = sequence_stats(scores);
            return py::make_tuple(s.mean, s.recall, s.decay);
        },
        py::arg("scores"));

    // weights and model
    py::class_<WeightsContainer>(m, "Weights")
        .def("names",
             [](const WeightsContainer& w) {
                 std::vector<std::string> names;
                 for (const auto& e : w.entries()) names.push_back(e.name);
                 return names;
             })
        .def("get", [](const WeightsContainer& w, const std::string& name) { return to_array(w.get(name)); })
        .def("checksum", &WeightsContainer::checksum)
        .def("__contains__", &WeightsContainer::contains)
        .def("__len__", [](const WeightsContainer& w) { return w.entries().size(); })
        .def("__eq__", [](const WeightsContainer& a, const WeightsContainer& b) { return a == b; });
    m.def("seeded_init", &seeded_init, py::arg("seed"), py::arg("n") = 256);
    m.def("save_weights", &save_weights, py::arg("weights"), py::arg("path"));
    m.def("load_weights", &load_weights, py::arg("path"));

    py::class_<Model>(m, "Model")
        .def(py::init([](const WeightsContainer& w) { return Model::from_weights(w); }), py::arg("weights"))
        .def_readonly("n", &Model::n);

    // pipeline
    m.def(
        "merge_objects",
        [](const std::vector<FloatArray>& probs, const std::vector<std::uint8_t>& ids, float theta) {
            std::vector<Tensor> ts;
            for (const auto& p : probs) ts.push_back(as_gate_tensor(p));
            return from_labels(merge_objects(ts, ids, theta));
        },
        py::arg("probabilities"), py::arg("ids") = std::vector<std::uint8_t>{}, py::arg("theta") = 0.5f);
    m.def(
        "run_sequence",
        [](const std::vector<ByteArray>& frames, const ByteArray& first, const Model& model, int k, int n,
           float theta, bool use_long, bool use_short, bool use_prev_mask) {
            std::vector<Image> images;
            for (const auto& f : frames) images.push_back(to_image(f));
            const LabelMap labels0 = to_labels(first);
            PipelineConfig cfg;
            cfg.match = match_config(k, n);
            cfg.theta = theta;
            cfg.ablation = {use_long, use_short, use_prev_mask};
            SequenceResult r;
            {
                py::gil_scoped_release nogil;
                r = run_sequence(images, labels0, model, cfg);
            }
            py::list out;
            for (const auto& l : r.labels) out.append(from_labels(l));
            return py::make_tuple(out, json_to_py(r.counters.to_json()));
        },
        py::arg("frames"), py::arg("first_labels"), py::arg("model"), py::arg("k") = 8, py::arg("n") = 256,
        py::arg("theta") = 0.5f, py::arg("use_long") = true, py::arg("use_short") = true,
        py::arg("use_prev_mask") = true);

    // data
    m.def(
        "synthetic_clip",
        [](std::size_t width, std::size_t height, std::size_t objects, std::size_t frames, std::uint64_t seed) {
            const SyntheticClip clip = make_synthetic_clip(width, height, objects, frames, seed);
            py::list fs, ls;
            for (const auto& f : clip.frames) fs.append(from_image(f));
            for (const auto& l : clip.labels) ls.append(from_labels(l));
            return py::make_tuple(fs, ls);
        },
        py::arg("width"), py::arg("height"), py::arg("objects"), py::arg("frames"), py::arg("seed") = 0);
    m.def("read_image", [](const std::filesystem::path& p) { return from_image(read_image(p)); }, py::arg("path"));
    m.def(
        "read_label_map", [](const std::filesystem::path& p) { return from_labels(read_label_map(p)); },
        py::arg("path"));
    m.def(
        "write_label_map",
        [](const std::filesystem::path& p, const ByteArray& labels) { write_label_map(p, to_labels(labels)); },
        py::arg("path"), py::arg("labels"));
}
