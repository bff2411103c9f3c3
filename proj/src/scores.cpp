#include "nscore/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nscore/error.hpp"

namespace nscore {

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw InvalidInput("logit vector needs at least 2 classes, got " +
                           std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidInput("logit " + std::to_string(i) + " is not finite");
        }
    }
}

ScorerSpec default_spec(ScorerKind kind) {
    return {kind, kind == ScorerKind::lc_identity ? Orientation::high_means_nonsign
                                                  : Orientation::high_means_sign};
}

const std::vector<ScorerKind>& all_scorer_kinds() {
    static const std::vector<ScorerKind> kinds = {
        ScorerKind::cr,          ScorerKind::cs1,          ScorerKind::cs2,
        ScorerKind::cs3,         ScorerKind::cs4,          ScorerKind::lc_identity,
        ScorerKind::lc_exp,      ScorerKind::lc_quadratic, ScorerKind::lc_cubic,
        ScorerKind::lc_absolute,
    };
    return kinds;
}

std::string_view scorer_name(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::cr: return "cr";
        case ScorerKind::cs1: return "cs1";
        case ScorerKind::cs2: return "cs2";
        case ScorerKind::cs3: return "cs3";
        case ScorerKind::cs4: return "cs4";
        case ScorerKind::lc_identity: return "lc_identity";
        case ScorerKind::lc_exp: return "lc_exp";
        case ScorerKind::lc_quadratic: return "lc_quadratic";
        case ScorerKind::lc_cubic: return "lc_cubic";
        case ScorerKind::lc_absolute: return "lc_absolute";
    }
    return "unknown";
}

std::optional<ScorerKind> parse_scorer_name(std::string_view name) {
    for (ScorerKind k : all_scorer_kinds()) {
        if (scorer_name(k) == name) return k;
    }
    return std::nullopt;
}

bool is_confidence_score(ScorerKind kind) {
    return kind == ScorerKind::cs1 || kind == ScorerKind::cs2 || kind == ScorerKind::cs3 ||
           kind == ScorerKind::cs4;
}

bool is_cognizance(ScorerKind kind) {
    return kind == ScorerKind::lc_identity || kind == ScorerKind::lc_exp ||
           kind == ScorerKind::lc_quadratic || kind == ScorerKind::lc_cubic ||
           kind == ScorerKind::lc_absolute;
}

std::string describe_flags(std::uint8_t flags) {
    std::string out;
    auto add = [&](const char* name) {
        if (!out.empty()) out += '|';
        out += name;
    };
    if (flags & flag_unreliable) add("unreliable");
    if (flags & flag_clamped) add("clamped");
    if (flags & flag_log_domain) add("log_domain");
    return out;
}

namespace {

ScoreValue make_value(const ScorerSpec& spec, double raw, std::uint8_t flags = flag_none) {
    ScoreValue v;
    v.raw = raw;
    v.oriented = spec.orientation == Orientation::high_means_sign ? raw : -raw;
    v.flags = flags;
    return v;
}

// log(sum_i exp(a_i)) over the indices not equal to skip.
double log_sum_exp(std::span<const double> a, std::size_t skip) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i != skip) m = std::max(m, a[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i != skip) s += std::exp(a[i] - m);
    }
    return m + std::log(s);
}

double cognizance(ScorerKind kind, double a) {
    switch (kind) {
        case ScorerKind::lc_identity: return a;
        case ScorerKind::lc_exp: return std::exp(a);
        case ScorerKind::lc_quadratic: return a * a;
        case ScorerKind::lc_cubic: return a * a * a;
        case ScorerKind::lc_absolute: return std::abs(a);
        default: break;
    }
    throw std::invalid_argument("not a cognizance kind: " + std::string(scorer_name(kind)));
}

}  // namespace

std::vector<double> softmax(const LogitVector& logits) {
    const auto a = logits.values();
    const double m = *std::max_element(a.begin(), a.end());
    std::vector<double> y(a.size());
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        y[i] = std::exp(a[i] - m);
        total += y[i];
    }
    for (double& v : y) v /= total;
    return y;
}

std::pair<std::size_t, std::size_t> argmax_pair(const LogitVector& logits) {
    const auto a = logits.values();
    std::size_t k = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] > a[k]) k = i;
    }
    std::size_t j = k == 0 ? 1 : 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i != k && a[i] > a[j]) j = i;
    }
    return {k, j};
}

double cs4_cap() {
    // 1 - (1 - 1e-15) is not 1e-15 in double, so spell the ratio out
    return std::log((1.0 - 1e-15) / 1e-15);
}

ScoreValue confidence_ratio(const LogitVector& logits) {
    const auto [k, j] = argmax_pair(logits);
    const double denom = logits[j];
    if (denom == 0.0) {
        throw DivisionByZero("confidence ratio undefined: second largest logit is 0");
    }
    return make_value(default_spec(ScorerKind::cr), logits[k] / denom,
                      denom < 0.0 ? flag_unreliable : flag_none);
}

ScoreValue confidence_score(const ScorerSpec& spec, const LogitVector& logits) {
    const auto [k, j] = argmax_pair(logits);
    switch (spec.kind) {
        case ScorerKind::cs1: return make_value(spec, softmax(logits)[k]);
        case ScorerKind::cs2: return make_value(spec, logits[k]);
        case ScorerKind::cs3: return make_value(spec, logits[k] - logits[j]);
        case ScorerKind::cs4: {
            // log(y_k / (1 - y_k)) = -log(sum_{i != k} exp(a_i - a_k)); shifting by a_k
            // keeps the result accurate when it lands near zero
            double rest = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) {
                if (i != k) rest += std::exp(logits[i] - logits[k]);
            }
            const double v = -std::log(rest);
            const double cap = cs4_cap();
            if (v > cap) return make_value(spec, cap, flag_clamped);
            return make_value(spec, v);
        }
        default: break;
    }
    throw std::invalid_argument("not a confidence score kind: " +
                                std::string(scorer_name(spec.kind)));
}

std::vector<double> cognizance_per_class(const ScorerSpec& spec, const LogitVector& logits) {
    std::vector<double> out;
    out.reserve(logits.size());
    for (double a : logits.values()) out.push_back(cognizance(spec.kind, a));
    return out;
}

ScoreValue cognizance_sum(const ScorerSpec& spec, const LogitVector& logits) {
    double sum = 0.0;
    for (double a : logits.values()) sum += cognizance(spec.kind, a);
    if (spec.kind != ScorerKind::lc_exp) return make_value(spec, sum);

    const double log_sum = log_sum_exp(logits.values(), logits.size());
    ScoreValue v = std::isfinite(sum) ? make_value(spec, sum)
                                      : make_value(spec, log_sum, flag_log_domain);
    v.log_raw = log_sum;
    return v;
}

ScoreValue score(const ScorerSpec& spec, const LogitVector& logits) {
    if (spec.kind == ScorerKind::cr) {
        ScoreValue v = confidence_ratio(logits);
        if (spec.orientation == Orientation::high_means_nonsign) v.oriented = -v.raw;
        return v;
    }
    if (is_confidence_score(spec.kind)) return confidence_score(spec, logits);
    return cognizance_sum(spec, logits);
}

}  // namespace nscore
