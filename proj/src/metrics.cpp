#include "lsmvos/metrics.hpp"

#include "lsmvos/error.hpp"

#include <algorithm>
#include <cmath>

namespace lsmvos {

namespace {

void require_same_extent(const BinaryMask& a, const BinaryMask& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.pixels.size() != a.width * a.height ||
        b.pixels.size() != b.width * b.height)
        throw ShapeError(std::string(what) + ": mask extents differ (" + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
}

// Square dilation by `r` via running counts along rows then columns.
BinaryMask dilate(const BinaryMask& m, std::size_t r) {
    if (r == 0) return m;
    const std::size_t W = m.width, H = m.height;
    BinaryMask rows(W, H), out(W, H);
    for (std::size_t y = 0; y < H; ++y) {
        std::size_t count = 0;
        // window [x - r, x + r]
        for (std::size_t x = 0; x < std::min(W, r); ++x) count += m.at(x, y) != 0;
        for (std::size_t x = 0; x < W; ++x) {
            if (x + r < W) count += m.at(x + r, y) != 0;
            if (x > r) count -= m.at(x - r - 1, y) != 0;
            rows.at(x, y) = count > 0;
        }
    }
    for (std::size_t x = 0; x < W; ++x) {
        std::size_t count = 0;
        for (std::size_t y = 0; y < std::min(H, r); ++y) count += rows.at(x, y) != 0;
        for (std::size_t y = 0; y < H; ++y) {
            if (y + r < H) count += rows.at(x, y + r) != 0;
            if (y > r) count -= rows.at(x, y - r - 1) != 0;
            out.at(x, y) = count > 0;
        }
    }
    return out;
}

} // namespace

BinaryMask BinaryMask::from_labels(const LabelMap& labels, std::uint8_t id) {
    BinaryMask m(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) m.pixels[i] = labels.labels[i] == id;
    return m;
}

double region_similarity(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_extent(pred, gt, "region_similarity");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
        const bool a = pred.pixels[i] != 0, b = gt.pixels[i] != 0;
        inter += a && b;
        uni += a || b;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask boundary_map(const BinaryMask& mask) {
    const std::size_t W = mask.width, H = mask.height;
    BinaryMask out(W, H);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x + 1 == W || y + 1 == H || !mask.at(x - 1, y) ||
                              !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
            out.at(x, y) = edge;
        }
    return out;
}

std::size_t default_boundary_tolerance(std::size_t width, std::size_t height) {
    const double diag = std::sqrt(static_cast<double>(width * width + height * height));
    return static_cast<std::size_t>(std::ceil(0.008 * diag));
}

double contour_accuracy(const BinaryMask& pred, const BinaryMask& gt, std::size_t tol) {
    require_same_extent(pred, gt, "contour_accuracy");
    const BinaryMask pb = boundary_map(pred), gb = boundary_map(gt);
    const BinaryMask pd = dilate(pb, tol), gd = dilate(gb, tol);
    std::size_t np = 0, ng = 0, hit_p = 0, hit_g = 0;
    for (std::size_t i = 0; i < pb.pixels.size(); ++i) {
        if (pb.pixels[i]) {
            ++np;
            hit_p += gd.pixels[i] != 0;
        }
        if (gb.pixels[i]) {
            ++ng;
            hit_g += pd.pixels[i] != 0;
        }
    }
    if (np == 0 && ng == 0) return 1.0;
    // An empty side contributes precision (or recall) 1 and the other side 0.
    const double precision = np == 0 ? 1.0 : static_cast<double>(hit_p) / static_cast<double>(np);
    const double recall = ng == 0 ? 1.0 : static_cast<double>(hit_g) / static_cast<double>(ng);
    if (np == 0 || ng == 0) return 0.0;
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

SequenceStats sequence_stats(std::span<const double> scores) {
    if (scores.empty()) throw ConfigError("sequence_stats: at least one frame score is required");
    const std::size_t T = scores.size();
    SequenceStats s;
    double sum = 0.0;
    std::size_t above = 0;
    for (double v : scores) {
        sum += v;
        above += v > 0.5;
    }
    s.mean = sum / static_cast<double>(T);
    s.recall = static_cast<double>(above) / static_cast<double>(T);
    const std::size_t q = (T + 3) / 4;
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        head += scores[i];
        tail += scores[T - q + i];
    }
    s.decay = (head - tail) / static_cast<double>(q);
    return s;
}

EvalReport aggregate(std::span<const FrameScore> scores) {
    std::map<std::uint8_t, std::vector<FrameScore>> grouped;
    for (const auto& s : scores) grouped[s.object].push_back(s);
    EvalReport report;
    for (auto& [id, list] : grouped) {
        std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
        std::vector<double> js, fs;
        for (const auto& s : list) {
            js.push_back(s.j);
            fs.push_back(s.f);
        }
        report.objects[id] = {sequence_stats(js), sequence_stats(fs), list.size()};
    }
    if (!report.objects.empty()) {
        for (const auto& [id, o] : report.objects) {
            report.j_mean += o.j.mean;
            report.f_mean += o.f.mean;
        }
        report.j_mean /= static_cast<double>(report.objects.size());
        report.f_mean /= static_cast<double>(report.objects.size());
    }
    report.jf_mean = (report.j_mean + report.f_mean) / 2.0;
    return report;
}

nlohmann::json EvalReport::to_json() const {
    auto stats = [](const SequenceStats& s) {
        return nlohmann::json{{"mean", s.mean}, {"recall", s.recall}, {"decay", s.decay}};
    };
    nlohmann::json out;
    out["objects"] = nlohmann::json::object();
    for (const auto& [id, o] : objects)
        out["objects"][std::to_string(id)] = {{"j", stats(o.j)}, {"f", stats(o.f)}, {"frames", o.frames}};
    out["j_mean"] = j_mean;
    out["f_mean"] = f_mean;
    out["jf_mean"] = jf_mean;
    out["timing"] = {{"elapsed_ms", elapsed_ms}};
    return out;
}

} // namespace lsmvos
