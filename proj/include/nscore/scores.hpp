#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nscore {

/// Penultimate activations of one sample. Always holds K >= 2 finite values.
class LogitVector {
public:
    explicit LogitVector(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

enum class ScorerKind {
    cr,
    cs1,
    cs2,
    cs3,
    cs4,
    lc_identity,
    lc_exp,
    lc_quadratic,
    lc_cubic,
    lc_absolute,
};

enum class Orientation { high_means_sign, high_means_nonsign };

struct ScorerSpec {
    ScorerKind kind = ScorerKind::cs2;
    Orientation orientation = Orientation::high_means_sign;
};

/// Default orientation: only the identity cognizance rises with novelty.
ScorerSpec default_spec(ScorerKind kind);

/// All kinds in the fixed reporting order (cr, cs1..cs4, lc_identity..lc_absolute).
const std::vector<ScorerKind>& all_scorer_kinds();

std::string_view scorer_name(ScorerKind kind);
std::optional<ScorerKind> parse_scorer_name(std::string_view name);

bool is_confidence_score(ScorerKind kind);
bool is_cognizance(ScorerKind kind);

enum ScoreFlag : std::uint8_t {
    flag_none = 0,
    flag_unreliable = 1 << 0,  // cr with a negative denominator
    flag_clamped = 1 << 1,     // cs4 capped at y = 1 - 1e-15
    flag_log_domain = 1 << 2,  // lc_exp sum overflowed; raw holds log(sum)
};

std::string describe_flags(std::uint8_t flags);

struct ScoreValue {
    double raw = 0.0;
    /// raw, negated when the scorer is high_means_nonsign: larger is always more sign-like.
    double oriented = 0.0;
    std::uint8_t flags = flag_none;
    /// log of the raw sum, kept for lc_exp only.
    std::optional<double> log_raw;

    bool has(ScoreFlag f) const noexcept { return (flags & f) != 0; }
};

std::vector<double> softmax(const LogitVector& logits);

/// Indices of the largest and second largest logit; ties go to the lower index.
std::pair<std::size_t, std::size_t> argmax_pair(const LogitVector& logits);

/// Upper cap applied to cs4, log((1 - 1e-15) / 1e-15).
double cs4_cap();

ScoreValue confidence_ratio(const LogitVector& logits);
ScoreValue confidence_score(const ScorerSpec& spec, const LogitVector& logits);
ScoreValue cognizance_sum(const ScorerSpec& spec, const LogitVector& logits);
std::vector<double> cognizance_per_class(const ScorerSpec& spec, const LogitVector& logits);

/// Dispatches on spec.kind.
ScoreValue score(const ScorerSpec& spec, const LogitVector& logits);

/// Novelty verdict at a fixed threshold.
inline bool flagged_novel(double oriented, double threshold) { return oriented < threshold; }

}  // namespace nscore
