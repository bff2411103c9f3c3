#include "nscore/eval.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#include "nscore/csv_util.hpp"
#include "nscore/error.hpp"

namespace nscore {

std::string_view group_name(OutcomeGroup g) {
    switch (g) {
        case OutcomeGroup::CP: return "CP";
        case OutcomeGroup::IP: return "IP";
        case OutcomeGroup::NS: return "NS";
    }
    return "?";
}

std::string_view positive_name(PositiveDefinition p) {
    return p == PositiveDefinition::novel_only ? "novel_only" : "wrong_or_novel";
}

OutcomeGroup classify_outcome(const std::optional<int>& true_class, bool is_novel,
                              std::size_t predicted_class) {
    validate_annotation(true_class, is_novel);
    if (is_novel) return OutcomeGroup::NS;
    return static_cast<std::size_t>(*true_class) == predicted_class ? OutcomeGroup::CP
                                                                    : OutcomeGroup::IP;
}

namespace {

// One run of equal oriented scores, with its positive/negative counts.
struct Tier {
    double score;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
};

std::vector<Tier> tiers_of(std::span<const ScoredSample> samples, PositiveDefinition posdef) {
    std::vector<std::pair<double, bool>> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.emplace_back(s.oriented_score, is_positive(s, posdef));
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Tier> tiers;
    for (const auto& [score, pos] : v) {
        if (tiers.empty() || tiers.back().score != score) tiers.push_back(Tier{score});
        (pos ? tiers.back().pos : tiers.back().neg) += 1;
    }
    return tiers;
}

void require_both_sides(std::uint64_t n_pos, std::uint64_t n_neg, PositiveDefinition posdef) {
    if (n_pos == 0) {
        throw DegenerateEvaluation("no positive samples under " +
                                   std::string(positive_name(posdef)));
    }
    if (n_neg == 0) {
        throw DegenerateEvaluation("no negative samples under " +
                                   std::string(positive_name(posdef)));
    }
}

CurvePoint make_point(double threshold, std::uint64_t tp, std::uint64_t fp, std::uint64_t n_pos,
                      std::uint64_t n_neg) {
    CurvePoint p;
    p.threshold = threshold;
    p.detection_rate = static_cast<double>(tp) / static_cast<double>(n_pos);
    p.false_alarm_rate = static_cast<double>(fp) / static_cast<double>(n_neg);
    p.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.recall = p.detection_rate;
    return p;
}

double midpoint(double a, double b) { return a / 2.0 + b / 2.0; }

// Twice the Mann-Whitney count, accumulated as trapezoids over the tier boundaries.
std::uint64_t twice_trapezoid(const std::vector<Tier>& tiers) {
    std::uint64_t tp = 0;
    std::uint64_t area2 = 0;
    for (const auto& t : tiers) {
        area2 += t.neg * (2 * tp + t.pos);
        tp += t.pos;
    }
    return area2;
}

double step_area(const std::vector<Tier>& tiers, std::uint64_t n_pos) {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    double area = 0.0;
    for (const auto& t : tiers) {
        tp += t.pos;
        fp += t.neg;
        if (t.pos == 0) continue;
        area += (static_cast<double>(t.pos) / static_cast<double>(n_pos)) *
                (static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
    return area;
}

}  // namespace

CurveReport sweep(std::span<const ScoredSample> samples, PositiveDefinition posdef,
                  ThresholdCount n_thresholds) {
    const auto tiers = tiers_of(samples, posdef);
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    for (const auto& t : tiers) {
        n_pos += t.pos;
        n_neg += t.neg;
    }
    require_both_sides(n_pos, n_neg, posdef);

    CurveReport report;
    report.positive = posdef;
    report.n_pos = n_pos;
    report.n_neg = n_neg;
    report.auroc = static_cast<double>(twice_trapezoid(tiers)) /
                   (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
    report.aupr = step_area(tiers, n_pos);

    constexpr double inf = std::numeric_limits<double>::infinity();
    report.points.push_back(make_point(-inf, 0, 0, n_pos, n_neg));
    if (!n_thresholds) {
        std::uint64_t tp = 0;
        std::uint64_t fp = 0;
        for (std::size_t i = 0; i + 1 < tiers.size(); ++i) {
            tp += tiers[i].pos;
            fp += tiers[i].neg;
            report.points.push_back(
                make_point(midpoint(tiers[i].score, tiers[i + 1].score), tp, fp, n_pos, n_neg));
        }
    } else if (*n_thresholds > 0) {
        const double lo = tiers.front().score;
        const double hi = tiers.back().score;
        const std::size_t n = *n_thresholds;
        std::size_t next = 0;
        std::uint64_t tp = 0;
        std::uint64_t fp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double tau =
                n == 1 ? midpoint(lo, hi)
                       : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            while (next < tiers.size() && tiers[next].score < tau) {
                tp += tiers[next].pos;
                fp += tiers[next].neg;
                ++next;
            }
            report.points.push_back(make_point(tau, tp, fp, n_pos, n_neg));
        }
    }
    report.points.push_back(make_point(inf, n_pos, n_neg, n_pos, n_neg));
    return report;
}

double auroc(std::span<const ScoredSample> samples, PositiveDefinition posdef) {
    const auto tiers = tiers_of(samples, posdef);
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    // Twice the rank sum of the negatives, midranks for ties (2 * midrank is an integer).
    std::uint64_t rank_sum2 = 0;
    std::uint64_t before = 0;
    for (const auto& t : tiers) {
        const std::uint64_t size = t.pos + t.neg;
        const std::uint64_t midrank2 = 2 * before + size + 1;
        rank_sum2 += t.neg * midrank2;
        before += size;
        n_pos += t.pos;
        n_neg += t.neg;
    }
    require_both_sides(n_pos, n_neg, posdef);
    const std::uint64_t u2 = rank_sum2 - n_neg * (n_neg + 1);
    return static_cast<double>(u2) /
           (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(std::span<const ScoredSample> samples, PositiveDefinition posdef) {
    const auto tiers = tiers_of(samples, posdef);
    std::uint64_t n_pos = 0;
    for (const auto& t : tiers) n_pos += t.pos;
    if (n_pos == 0) {
        throw DegenerateEvaluation("no positive samples under " +
                                   std::string(positive_name(posdef)));
    }
    return step_area(tiers, n_pos);
}

std::vector<ScoredSample> score_records(std::span<const LogitRecord> records,
                                        const ScorerSpec& spec) {
    std::vector<ScoreValue> values;
    values.reserve(records.size());
    bool any_log_domain = false;
    for (const auto& r : records) {
        try {
            values.push_back(score(spec, r.logits));
        } catch (const DivisionByZero& e) {
            if (r.line > 0) throw DivisionByZero("line " + std::to_string(r.line) + ": " + e.what());
            throw DivisionByZero("sample " + r.sample_id + ": " + e.what());
        }
        any_log_domain = any_log_domain || values.back().has(flag_log_domain);
    }

    std::vector<ScoredSample> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        ScoredSample s;
        s.sample_id = r.sample_id;
        s.true_class = r.true_class;
        s.is_novel = r.is_novel;
        s.predicted_class = argmax_pair(r.logits).first;
        s.group = classify_outcome(r.true_class, r.is_novel, s.predicted_class);
        s.oriented_score = values[i].oriented;
        if (any_log_domain && values[i].log_raw) {
            s.oriented_score = spec.orientation == Orientation::high_means_sign
                                   ? *values[i].log_raw
                                   : -*values[i].log_raw;
        }
        out.push_back(std::move(s));
    }
    return out;
}

ScorerEvaluation evaluate_scorer(std::span<const LogitRecord> records, const ScorerSpec& spec,
                                 ThresholdCount n_thresholds) {
    ScorerEvaluation ev;
    ev.spec = spec;
    const auto samples = score_records(records, spec);
    ev.novel_only = sweep(samples, PositiveDefinition::novel_only, n_thresholds);
    ev.wrong_or_novel = sweep(samples, PositiveDefinition::wrong_or_novel, n_thresholds);
    for (const auto& r : records) {
        const ScoreValue v = score(spec, r.logits);
        ev.n_unreliable += v.has(flag_unreliable);
        ev.n_clamped += v.has(flag_clamped);
        ev.n_log_domain += v.has(flag_log_domain);
    }
    return ev;
}

FoldEvaluation evaluate_scorer_per_fold(const std::vector<LogitRecord>& records,
                                        const ScorerSpec& spec, const FoldPlan& plan) {
    FoldEvaluation out;
    for (const auto& fold : plan.folds) {
        const auto split = split_fold(records, fold);
        out.per_fold.push_back(evaluate_scorer(split.test, spec));
    }
    const double n = static_cast<double>(out.per_fold.size());
    for (const auto& ev : out.per_fold) {
        out.mean_auroc_novel_only += ev.novel_only.auroc / n;
        out.mean_aupr_novel_only += ev.novel_only.aupr / n;
        out.mean_auroc_wrong_or_novel += ev.wrong_or_novel.auroc / n;
        out.mean_aupr_wrong_or_novel += ev.wrong_or_novel.aupr / n;
    }
    return out;
}

std::string format_curve_csv(const CurveReport& report) {
    std::string out = "threshold,detection_rate,false_alarm_rate,precision,recall\n";
    for (const auto& p : report.points) {
        out += format_double(p.threshold) + ',' + format_double(p.detection_rate) + ',' +
               format_double(p.false_alarm_rate) + ',' + format_double(p.precision) + ',' +
               format_double(p.recall) + '\n';
    }
    return out;
}

}  // namespace nscore
