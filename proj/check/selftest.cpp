#include "lsmvos_check/selftest.hpp"

#include "lsmvos_check/oracles.hpp"

#include "lsmvos/encoder.hpp"
#include "lsmvos/image.hpp"
#include "lsmvos/matching.hpp"
#include "lsmvos/metrics.hpp"
#include "lsmvos/numerics.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace lsmvos::check {

namespace {

CheckResult timed(const std::string& name, const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific << v;
    return os.str();
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double weighted_sum(const std::vector<double>& values, const Tensor& upstream) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * upstream[i];
    return s;
}

// Shared driver for both matching gradients. `reference` recomputes the
// operator in double for given (cur, other).
CheckResult matching_gradient(const std::string& name, std::size_t coords, std::uint64_t seed, bool windowed) {
    return timed(name, [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        const std::size_t C = 8;
        const std::size_t H = windowed ? 7 : 6, W = windowed ? 7 : 6;
        const std::size_t RH = windowed ? H : 5, RW = windowed ? W : 5;
        MatchConfig cfg;
        cfg.k = 2;
        cfg.n = windowed ? 10 : 12;
        Tensor cur = random_unit_features(C, H, W, rng);
        Tensor other = random_unit_features(C, RH, RW, rng);
        const Tensor gate_t = random_gate(RH, RW, rng);
        const GateMask gate(gate_t);
        const Tensor upstream = random_tensor({static_cast<std::size_t>(cfg.n), H, W}, rng);

        const MatchResult fwd = windowed ? short_term_match(cur, other, gate, GatePolarity::Foreground, cfg)
                                         : long_term_match(cur, other, gate, GatePolarity::Foreground, cfg);
        const MatchGradients grads =
            windowed ? short_term_match_backward(upstream, cur, other, gate, GatePolarity::Foreground, fwd)
                     : long_term_match_backward(upstream, cur, other, gate, GatePolarity::Foreground, fwd);

        auto reference = [&](const Tensor& a, const Tensor& b) {
            return windowed ? short_term_reference(a, b, gate_t, GatePolarity::Foreground, cfg.k, cfg.n)
                            : long_term_reference(a, b, gate_t, GatePolarity::Foreground, cfg.n);
        };

        const float h = 1e-3f;
        std::size_t accepted = 0, skipped = 0, attempts = 0;
        double worst = 0.0;
        while (accepted < coords && attempts < coords * 20) {
            ++attempts;
            const bool on_cur = pick(rng, 0, 1) == 0;
            Tensor& target = on_cur ? cur : other;
            const std::size_t idx = pick(rng, 0, target.size() - 1);
            const float saved = target[idx];
            target[idx] = saved + h;
            const double xp = target[idx];
            const ReferenceMatch plus = reference(cur, other);
            target[idx] = saved - h;
            const double xm = target[idx];
            const ReferenceMatch minus = reference(cur, other);
            target[idx] = saved;
            if (plus.source != fwd.source || minus.source != fwd.source) {
                ++skipped;
                continue;
            }
            const double numeric = (weighted_sum(plus.values, upstream) - weighted_sum(minus.values, upstream)) /
                                   (xp - xm);
            const double analytic = on_cur ? grads.cur[idx] : grads.other[idx];
            worst = std::max(worst, relative_error(analytic, numeric));
            ++accepted;
        }
        r.passed = accepted >= coords && worst < 1e-3;
        r.detail = std::to_string(accepted) + " coords (" + std::to_string(skipped) +
                   " skipped: selection changed), max rel err " + fmt(worst);
    });
}

} // namespace

CheckResult check_conv2d_oracle(std::size_t draws, std::uint64_t seed) {
    return timed("conv2d == nested-loop oracle", [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (std::size_t d = 0; d < draws; ++d) {
            const std::size_t C = pick(rng, 1, 6), K = pick(rng, 1, 6);
            const std::size_t kh = pick(rng, 1, 5), kw = pick(rng, 1, 5);
            ConvSpec spec{random_tensor({K, C, kh, kw}, rng, 0.5f), random_tensor({K}, rng, 0.5f),
                          static_cast<int>(pick(rng, 1, 2)), static_cast<int>(pick(rng, 0, 2)),
                          static_cast<int>(pick(rng, 0, 2))};
            const std::size_t H = pick(rng, std::max<std::size_t>(kh, 3), 13);
            const std::size_t W = pick(rng, std::max<std::size_t>(kw, 3), 13);
            const Tensor x = random_tensor({C, H, W}, rng);
            worst = std::max(worst, max_abs_diff(conv2d(x, spec), conv2d_reference(x, spec)));
        }
        r.passed = worst < 1e-5;
        r.detail = std::to_string(draws) + " draws, max |diff| " + fmt(worst);
    });
}

CheckResult check_short_term_oracle(std::size_t instances, std::uint64_t seed) {
    return timed("short_term_match == per-pixel oracle", [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (std::size_t i = 0; i < instances; ++i) {
            const std::size_t C = pick(rng, 0, 1) ? 16 : 8;
            const std::size_t H = pick(rng, 8, 16), W = pick(rng, 8, 16);
            MatchConfig cfg;
            cfg.k = static_cast<int>(pick(rng, 0, 3));
            cfg.n = static_cast<int>(pick(rng, 1, cfg.window_candidates()));
            const Tensor cur = random_unit_features(C, H, W, rng), prev = random_unit_features(C, H, W, rng);
            const Tensor gate = random_gate(H, W, rng);
            for (auto pol : {GatePolarity::Foreground, GatePolarity::Background}) {
                const MatchResult got = short_term_match(cur, prev, GateMask(gate), pol, cfg);
                const Tensor want = short_term_reference(cur, prev, gate, pol, cfg.k, cfg.n).as_tensor();
                worst = std::max(worst, max_abs_diff(got.similarity, want));
            }
        }
        r.passed = worst < 1e-5;
        r.detail = std::to_string(instances) + " instances x 2 polarities, max |diff| " + fmt(worst);
    });
}

CheckResult check_long_term_oracle(std::size_t instances, std::uint64_t seed) {
    return timed("long_term_match == all-pairs oracle", [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (std::size_t i = 0; i < instances; ++i) {
            const std::size_t C = pick(rng, 0, 1) ? 16 : 8;
            const std::size_t H = pick(rng, 8, 16), W = pick(rng, 8, 16);
            const std::size_t RH = pick(rng, 6, 16), RW = pick(rng, 6, 16);
            MatchConfig cfg;
            cfg.n = static_cast<int>(pick(rng, 1, RH * RW + 8));
            const Tensor cur = random_unit_features(C, H, W, rng), ref = random_unit_features(C, RH, RW, rng);
            const Tensor gate = random_gate(RH, RW, rng);
            for (auto pol : {GatePolarity::Foreground, GatePolarity::Background}) {
                const MatchResult got = long_term_match(cur, ref, GateMask(gate), pol, cfg);
                const Tensor want = long_term_reference(cur, ref, gate, pol, cfg.n).as_tensor();
                worst = std::max(worst, max_abs_diff(got.similarity, want));
            }
        }
        r.passed = worst < 1e-5;
        r.detail = std::to_string(instances) + " instances x 2 polarities (asymmetric ref extents), max |diff| " +
                   fmt(worst);
    });
}

CheckResult check_window_global_consistency(std::uint64_t seed) {
    return timed("window(k=12) == global on 12x12", [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        std::size_t mismatches = 0, checked = 0;
        for (int n : {1, 17, 144, 200}) {
            const Tensor cur = random_unit_features(16, 12, 12, rng), prev = random_unit_features(16, 12, 12, rng);
            const GateMask ones = GateMask::constant(12, 12, 1.0f);
            MatchConfig cfg;
            cfg.k = 12;
            cfg.n = n;
            for (auto pol : {GatePolarity::Foreground, GatePolarity::Background}) {
                const MatchResult s = short_term_match(cur, prev, ones, pol, cfg);
                const MatchResult l = long_term_match(cur, prev, ones, pol, cfg);
                ++checked;
                if (!(s.similarity == l.similarity) || s.source != l.source) ++mismatches;
            }
        }
        r.passed = mismatches == 0;
        r.detail = std::to_string(checked) + " comparisons, " + std::to_string(mismatches) + " not bit-identical";
    });
}

CheckResult check_short_term_gradient(std::size_t coords, std::uint64_t seed) {
    return matching_gradient("short_term_match_backward vs finite differences", coords, seed, true);
}

CheckResult check_long_term_gradient(std::size_t coords, std::uint64_t seed) {
    return matching_gradient("long_term_match_backward vs finite differences", coords, seed, false);
}

CheckResult check_focal_gradient(std::size_t coords, std::uint64_t seed) {
    return timed("focal_loss gradient vs finite differences", [&](CheckResult& r) {
        std::mt19937_64 rng(seed);
        const std::size_t side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(coords))));
        Tensor p({1, side, side}), t({1, side, side});
        std::uniform_real_distribution<float> u(0.05f, 0.95f);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = u(rng);
            t[i] = pick(rng, 0, 1) ? 1.0f : 0.0f;
        }
        const float gamma = kFocalGamma, alpha = kFocalAlpha;
        const FocalLossResult res = focal_loss(p, t, gamma, alpha);
        std::vector<double> pd(p.data().begin(), p.data().end()), td(t.data().begin(), t.data().end());
        const double h = 1e-3;
        double worst = 0.0;
        std::size_t checked = 0;
        for (std::size_t i = 0; i < p.size() && checked < std::max(coords, p.size()); ++i, ++checked) {
            const double saved = pd[i];
            pd[i] = saved + h;
            const double lp = focal_loss_reference(pd, td, gamma, alpha);
            pd[i] = saved - h;
            const double lm = focal_loss_reference(pd, td, gamma, alpha);
            pd[i] = saved;
            worst = std::max(worst, relative_error(res.grad[i], (lp - lm) / (2.0 * h), 1e-9));
        }
        r.passed = checked >= coords && worst < 1e-3;
        r.detail = std::to_string(checked) + " coords, max rel err " + fmt(worst);
    });
}

CheckResult check_default_constants() {
    return timed("default constants (289 / 256 / 107x60)", [&](CheckResult& r) {
        const MatchConfig cfg;
        const PaddedImage padded = pad_to_multiple(Image(854, 480), kFeatureStride);
        const std::size_t fw = padded.image.width / kFeatureStride, fh = padded.image.height / kFeatureStride;
        std::mt19937_64 rng(7);
        const Tensor f = random_unit_features(8, 4, 4, rng);
        const MatchResult m = long_term_match(f, f, GateMask::constant(4, 4, 1.0f), GatePolarity::Foreground, cfg);
        r.passed = cfg.window_candidates() == 289 && m.similarity.channels() == 256 && fw == 107 && fh == 60 &&
                   padded.image.width == 856;
        r.detail = "window " + std::to_string(cfg.window_candidates()) + ", channels " +
                   std::to_string(m.similarity.channels()) + ", features " + std::to_string(fw) + "x" +
                   std::to_string(fh) + " (padded " + std::to_string(padded.image.width) + "x" +
                   std::to_string(padded.image.height) + ")";
    });
}

CheckResult check_metrics_ground_truth() {
    return timed("metrics ground truth", [&](CheckResult& r) {
        std::vector<std::string> failures;
        auto expect = [&](bool ok, const std::string& what) {
            if (!ok) failures.push_back(what);
        };
        auto square = [](std::size_t W, std::size_t H, std::size_t x0, std::size_t y0, std::size_t w,
                         std::size_t h) {
            BinaryMask m(W, H);
            for (std::size_t y = y0; y < y0 + h; ++y)
                for (std::size_t x = x0; x < x0 + w; ++x) m.at(x, y) = 1;
            return m;
        };
        const BinaryMask a = square(40, 40, 5, 5, 10, 10);
        expect(region_similarity(a, a) == 1.0 && contour_accuracy(a, a, 2) == 1.0, "identical masks");
        const BinaryMask far = square(40, 40, 25, 25, 10, 10);
        expect(region_similarity(a, far) == 0.0 && contour_accuracy(a, far, 2) == 0.0, "disjoint masks");
        const BinaryMask half = square(40, 40, 10, 5, 10, 10);
        expect(std::abs(region_similarity(a, half) - 1.0 / 3.0) < 1e-9, "half overlap J = 1/3");
        const BinaryMask shifted = square(40, 40, 6, 5, 10, 10);
        expect(contour_accuracy(a, shifted, 2) == 1.0, "1-pixel shift F = 1 at tol 2");
        const std::vector<double> seq{0.9, 0.8, 0.7, 0.6};
        const SequenceStats s = sequence_stats(seq);
        expect(std::abs(s.mean - 0.75) < 1e-9 && s.recall == 1.0 && std::abs(s.decay - 0.3) < 1e-9,
               "sequence_stats([0.9,0.8,0.7,0.6]) = (0.75, 1, 0.3)");
        r.passed = failures.empty();
        if (failures.empty()) {
            r.detail = "J/F fixtures and sequence statistics match";
        } else {
            for (const auto& f : failures) r.detail += (r.detail.empty() ? "failed: " : ", ") + f;
        }
    });
}

void print_result(std::ostream& os, const CheckResult& r) {
    os << (r.passed ? "[PASS] " : "[FAIL] ") << std::left << std::setw(50) << r.name << " " << std::right
       << std::fixed << std::setprecision(2) << std::setw(7) << r.seconds << "s  " << r.detail << "\n";
}

std::vector<CheckResult> run_selftest(std::ostream* log, std::uint64_t seed) {
    using Check = std::function<CheckResult()>;
    const std::vector<Check> checks{
        [&] { return check_conv2d_oracle(200, seed); },
        [&] { return check_short_term_oracle(50, seed + 1); },
        [&] { return check_long_term_oracle(50, seed + 2); },
        [&] { return check_window_global_consistency(seed + 3); },
        [&] { return check_short_term_gradient(100, seed + 4); },
        [&] { return check_long_term_gradient(100, seed + 5); },
        [&] { return check_focal_gradient(100, seed + 6); },
        [] { return check_default_constants(); },
        [] { return check_metrics_ground_truth(); },
    };
    std::vector<CheckResult> results;
    for (const auto& c : checks) {
        results.push_back(c());
        if (log) print_result(*log, results.back());
    }
    return results;
}

} // namespace lsmvos::check
