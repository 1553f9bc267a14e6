#pragma once

#include "lsmvos/tensor.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace lsmvos {

/// Soft foreground probability at feature resolution (1×H×W, values in [0,1]).
class GateMask {
public:
    GateMask() = default;
    explicit GateMask(Tensor values);

    static GateMask constant(std::size_t height, std::size_t width, float value);

    const Tensor& values() const noexcept { return values_; }
    std::size_t height() const { return values_.height(); }
    std::size_t width() const { return values_.width(); }

private:
    Tensor values_;
};

/// Which side of the gate a similarity map attends to: the gate itself or 1 - gate.
enum class GatePolarity { Foreground, Background };

struct MatchConfig {
    int k = 8;   // short-term window radius
    int n = 256; // similarity channels kept per position

    void validate() const;
    std::size_t window_candidates() const { return static_cast<std::size_t>((2 * k + 1) * (2 * k + 1)); }
};

/// A similarity map (n×H×W, non-increasing along the first axis) together with
/// the flat source position each entry was taken from in the matched feature
/// map; -1 marks zero-filled slots. The sources are what backward needs.
struct MatchResult {
    Tensor similarity;
    std::vector<std::int32_t> source;
};

struct MatchGradients {
    Tensor cur;   // d/d current features
    Tensor other; // d/d previous (short-term) or reference (long-term) features
};

/// Non-overlapping stride×stride average pooling of a 1×H×W mask.
GateMask downsample_mask(const Tensor& mask, std::size_t stride = 8);

/// Windowed matching of each current position against previous-frame
/// positions within Chebyshev distance k. Candidates falling outside the
/// image do not take part. When fewer than n candidates exist the remaining
/// slots hold 0 with source -1, ordered after every non-negative value.
MatchResult short_term_match(const Tensor& cur, const Tensor& prev, const GateMask& gate, GatePolarity polarity,
                             const MatchConfig& cfg);

/// Foreground and background maps from a single pass over the window.
std::array<MatchResult, 2> short_term_match_pair(const Tensor& cur, const Tensor& prev, const GateMask& gate,
                                                 const MatchConfig& cfg);

/// Matching of each current position against every reference position.
MatchResult long_term_match(const Tensor& cur, const Tensor& ref, const GateMask& ref_gate, GatePolarity polarity,
                            const MatchConfig& cfg);

std::array<MatchResult, 2> long_term_match_pair(const Tensor& cur, const Tensor& ref, const GateMask& ref_gate,
                                                const MatchConfig& cfg);

/// Gradients of sum(upstream * similarity) with the selected entries held
/// fixed and the gate treated as a constant.
MatchGradients short_term_match_backward(const Tensor& upstream, const Tensor& cur, const Tensor& prev,
                                         const GateMask& gate, GatePolarity polarity, const MatchResult& forward);

MatchGradients long_term_match_backward(const Tensor& upstream, const Tensor& cur, const Tensor& ref,
                                        const GateMask& ref_gate, GatePolarity polarity, const MatchResult& forward);

} // namespace lsmvos
