#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nscore/dataio.hpp"
#include "nscore/scores.hpp"

namespace nscore {

enum class OutcomeGroup { CP, IP, NS };

std::string_view group_name(OutcomeGroup g);

/// NS when novel, CP when the prediction matches, IP otherwise.
OutcomeGroup classify_outcome(const std::optional<int>& true_class, bool is_novel,
                              std::size_t predicted_class);

struct ScoredSample {
    std::string sample_id;
    std::optional<int> true_class;
    bool is_novel = false;
    std::size_t predicted_class = 0;
    OutcomeGroup group = OutcomeGroup::CP;
    double oriented_score = 0.0;
};

enum class PositiveDefinition { wrong_or_novel, novel_only };

std::string_view positive_name(PositiveDefinition p);

inline bool is_positive(const ScoredSample& s, PositiveDefinition p) {
    return p == PositiveDefinition::novel_only ? s.group == OutcomeGroup::NS
                                               : s.group != OutcomeGroup::CP;
}

struct CurvePoint {
    double threshold = 0.0;
    double detection_rate = 0.0;
    double false_alarm_rate = 0.0;
    double precision = 1.0;
    double recall = 0.0;
};

/// Threshold sweep with "flag as novel when oriented_score < threshold".
/// Points are sorted by threshold; detection and false-alarm rates rise with it.
struct CurveReport {
    PositiveDefinition positive = PositiveDefinition::novel_only;
    std::vector<CurvePoint> points;
    /// Trapezoidal area under (false_alarm_rate, detection_rate) over all unique thresholds.
    double auroc = 0.0;
    /// Step-interpolated precision-recall area over all unique thresholds.
    double aupr = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// Threshold count for sweep(): nullopt means every midpoint between unique scores.
using ThresholdCount = std::optional<std::size_t>;

CurveReport sweep(std::span<const ScoredSample> samples, PositiveDefinition posdef,
                  ThresholdCount n_thresholds = std::nullopt);

/// Mann-Whitney form: fraction of (positive, negative) pairs where the positive scores
/// lower (more novel), ties counting one half.
double auroc(std::span<const ScoredSample> samples, PositiveDefinition posdef);

/// Average precision with precision held as a step function of recall.
double aupr(std::span<const ScoredSample> samples, PositiveDefinition posdef);

/// Scores every record with spec and joins the outcome group. When the lc_exp sum
/// overflows on any record, every record is ranked on the log-domain value instead.
std::vector<ScoredSample> score_records(std::span<const LogitRecord> records,
                                        const ScorerSpec& spec);

struct ScorerEvaluation {
    ScorerSpec spec;
    CurveReport novel_only;
    CurveReport wrong_or_novel;
    std::size_t n_unreliable = 0;
    std::size_t n_clamped = 0;
    std::size_t n_log_domain = 0;
};

ScorerEvaluation evaluate_scorer(std::span<const LogitRecord> records, const ScorerSpec& spec,
                                 ThresholdCount n_thresholds = std::nullopt);

struct FoldEvaluation {
    std::vector<ScorerEvaluation> per_fold;
    double mean_auroc_novel_only = 0.0;
    double mean_aupr_wrong_or_novel = 0.0;
    double mean_auroc_wrong_or_novel = 0.0;
    double mean_aupr_novel_only = 0.0;
};

/// Evaluates each fold's test side separately and averages the scalar metrics.
FoldEvaluation evaluate_scorer_per_fold(const std::vector<LogitRecord>& records,
                                        const ScorerSpec& spec, const FoldPlan& plan);

/// Columns: threshold,detection_rate,false_alarm_rate,precision,recall
std::string format_curve_csv(const CurveReport& report);

}  // namespace nscore
