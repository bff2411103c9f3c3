#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nscore/error.hpp"
#include "nscore/eval.hpp"
#include "oracles.hpp"

using namespace nscore;

namespace {

ScoredSample sample(double score, OutcomeGroup g) {
    ScoredSample s;
    s.group = g;
    s.is_novel = g == OutcomeGroup::NS;
    s.oriented_score = score;
    return s;
}

std::vector<ScoredSample> pos_neg(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<ScoredSample> out;
    for (double p : pos) out.push_back(sample(p, OutcomeGroup::NS));
    for (double n : neg) out.push_back(sample(n, OutcomeGroup::CP));
    return out;
}

std::vector<oracle::Labeled> labeled(const std::vector<ScoredSample>& s, PositiveDefinition p) {
    std::vector<oracle::Labeled> out;
    for (const auto& x : s) out.push_back({x.oriented_score, is_positive(x, p)});
    return out;
}

// Coarse integer-valued scores so ties are common.
std::vector<ScoredSample> random_samples(std::mt19937_64& rng, std::size_t max_n) {
    std::uniform_int_distribution<std::size_t> n_dist(2, max_n);
    std::uniform_int_distribution<int> g_dist(0, 2);
    std::uniform_int_distribution<int> s_dist(0, 12);
    const std::size_t n = n_dist(rng);
    std::vector<ScoredSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample(s_dist(rng) * 0.25, static_cast<OutcomeGroup>(g_dist(rng))));
    }
    out[0].group = OutcomeGroup::NS;
    out[1].group = OutcomeGroup::CP;
    return out;
}

}  // namespace

TEST(ClassifyOutcome, Examples) {
    EXPECT_EQ(classify_outcome(3, false, 3), OutcomeGroup::CP);
    EXPECT_EQ(classify_outcome(3, false, 1), OutcomeGroup::IP);
    EXPECT_EQ(classify_outcome(std::nullopt, true, 7), OutcomeGroup::NS);
    EXPECT_THROW(classify_outcome(3, true, 3), InvalidRecord);
    EXPECT_THROW(classify_outcome(std::nullopt, false, 3), InvalidRecord);
}

TEST(Sweep, PerfectSeparation) {
    const auto s = pos_neg({0}, {1});
    const auto r = sweep(s, PositiveDefinition::novel_only);
    EXPECT_DOUBLE_EQ(r.auroc, 1.0);
    EXPECT_DOUBLE_EQ(r.aupr, 1.0);
    bool through = false;
    for (const auto& p : r.points) through = through || (p.detection_rate == 1.0 && p.false_alarm_rate == 0.0);
    EXPECT_TRUE(through);
    EXPECT_DOUBLE_EQ(auroc(s, PositiveDefinition::novel_only), 1.0);
}

TEST(Sweep, Endpoints) {
    const auto r = sweep(pos_neg({1, 3}, {2, 4}), PositiveDefinition::novel_only);
    ASSERT_GE(r.points.size(), 2u);
    EXPECT_TRUE(std::isinf(r.points.front().threshold) && r.points.front().threshold < 0);
    EXPECT_EQ(r.points.front().detection_rate, 0.0);
    EXPECT_EQ(r.points.front().false_alarm_rate, 0.0);
    EXPECT_EQ(r.points.front().precision, 1.0);
    EXPECT_TRUE(std::isinf(r.points.back().threshold) && r.points.back().threshold > 0);
    EXPECT_EQ(r.points.back().detection_rate, 1.0);
    EXPECT_EQ(r.points.back().false_alarm_rate, 1.0);
    EXPECT_EQ(r.n_pos, 2u);
    EXPECT_EQ(r.n_neg, 2u);
}

TEST(Sweep, IdenticalDistributionsGiveHalf) {
    const auto s = pos_neg({1, 2, 2, 5}, {1, 2, 2, 5});
    EXPECT_DOUBLE_EQ(sweep(s, PositiveDefinition::novel_only).auroc, 0.5);
    EXPECT_DOUBLE_EQ(auroc(s, PositiveDefinition::novel_only), 0.5);
}

TEST(Sweep, LowScoringPositivesConvention) {
    // Pairs with pos < neg: (1,2), (1,4), (3,4) out of 4.
    const auto s = pos_neg({1, 3}, {2, 4});
    EXPECT_DOUBLE_EQ(auroc(s, PositiveDefinition::novel_only), 0.75);
    EXPECT_DOUBLE_EQ(sweep(s, PositiveDefinition::novel_only).auroc, 0.75);
    EXPECT_DOUBLE_EQ(oracle::pairwise_auroc(labeled(s, PositiveDefinition::novel_only)), 0.75);
}

TEST(Sweep, DegenerateSidesAreNamed) {
    const auto only_neg = pos_neg({}, {1, 2});
    try {
        sweep(only_neg, PositiveDefinition::novel_only);
        FAIL();
    } catch (const DegenerateEvaluation& e) {
        EXPECT_NE(std::string(e.what()).find("no positive"), std::string::npos);
    }
    try {
        sweep(pos_neg({1, 2}, {}), PositiveDefinition::novel_only);
        FAIL();
    } catch (const DegenerateEvaluation& e) {
        EXPECT_NE(std::string(e.what()).find("no negative"), std::string::npos);
    }
    EXPECT_THROW(aupr(only_neg, PositiveDefinition::novel_only), DegenerateEvaluation);
}

TEST(Aupr, AllPositiveIsOne) {
    EXPECT_DOUBLE_EQ(aupr(pos_neg({0.3, 1.0, 1.0, 7.0}, {}), PositiveDefinition::novel_only), 1.0);
}

TEST(Sweep, PositiveDefinitions) {
    std::vector<ScoredSample> s{sample(0.0, OutcomeGroup::NS), sample(1.0, OutcomeGroup::IP),
                                sample(2.0, OutcomeGroup::CP)};
    const auto novel = sweep(s, PositiveDefinition::novel_only);
    const auto won = sweep(s, PositiveDefinition::wrong_or_novel);
    EXPECT_EQ(novel.n_pos, 1u);
    EXPECT_EQ(novel.n_neg, 2u);
    EXPECT_EQ(won.n_pos, 2u);
    EXPECT_EQ(won.n_neg, 1u);
    EXPECT_DOUBLE_EQ(won.auroc, 1.0);
}

TEST(Sweep, RandomInstancesMatchOracles) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = random_samples(rng, 50);
        for (auto p : {PositiveDefinition::novel_only, PositiveDefinition::wrong_or_novel}) {
            const auto lab = labeled(s, p);
            std::size_t np = 0;
            for (const auto& l : lab) np += l.positive;
            if (np == 0 || np == lab.size()) continue;
            const auto r = sweep(s, p);
            const double pairwise = oracle::pairwise_auroc(lab);
            EXPECT_NEAR(r.auroc, pairwise, 1e-12);
            EXPECT_NEAR(auroc(s, p), pairwise, 1e-12);
            EXPECT_NEAR(r.aupr, oracle::brute_force_aupr(lab), 1e-9);
            EXPECT_NEAR(aupr(s, p), r.aupr, 1e-15);

            for (std::size_t i = 1; i < r.points.size(); ++i) {
                EXPECT_LT(r.points[i - 1].threshold, r.points[i].threshold);
                EXPECT_LE(r.points[i - 1].detection_rate, r.points[i].detection_rate);
                EXPECT_LE(r.points[i - 1].false_alarm_rate, r.points[i].false_alarm_rate);
            }
        }
    }
}

TEST(Auroc, InvariantUnderIncreasingTransform) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_samples(rng, 40);
        const double base = auroc(s, PositiveDefinition::wrong_or_novel);
        for (auto& x : s) x.oriented_score = std::exp(3.0 * x.oriented_score) - 5.0;
        EXPECT_DOUBLE_EQ(auroc(s, PositiveDefinition::wrong_or_novel), base);
    }
}

TEST(Auroc, FlippingOrientationComplements) {
    std::mt19937_64 rng(78);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_samples(rng, 40);
        const double base = auroc(s, PositiveDefinition::novel_only);
        for (auto& x : s) x.oriented_score = -x.oriented_score;
        EXPECT_NEAR(auroc(s, PositiveDefinition::novel_only), 1.0 - base, 1e-15);
    }
}

TEST(Auroc, DuplicatingEachSampleIsNeutral) {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_samples(rng, 40);
        const double base = auroc(s, PositiveDefinition::novel_only);
        const auto copy = s;
        s.insert(s.end(), copy.begin(), copy.end());
        EXPECT_NEAR(auroc(s, PositiveDefinition::novel_only), base, 1e-12);
    }
}

TEST(Sweep, FixedThresholdCount) {
    const auto s = pos_neg({0, 1, 2}, {3, 4, 5});
    const auto r = sweep(s, PositiveDefinition::novel_only, 6);
    EXPECT_EQ(r.points.size(), 8u);
    EXPECT_DOUBLE_EQ(r.auroc, 1.0);
    EXPECT_DOUBLE_EQ(r.points[1].threshold, 0.0);
    EXPECT_DOUBLE_EQ(r.points[6].threshold, 5.0);
    // flagged: score < 2 -> {0, 1}
    EXPECT_NEAR(r.points[3].detection_rate, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(r.points[3].false_alarm_rate, 0.0);
}

TEST(EvaluateScorer, NeedsNonSigns) {
    std::vector<LogitRecord> records;
    records.push_back({"a", "g1", 0, false, LogitVector({2.0, 1.0}), 0});
    records.push_back({"b", "g1", 1, false, LogitVector({2.0, 1.0}), 0});
    EXPECT_THROW(evaluate_scorer(records, default_spec(ScorerKind::cs2)), DegenerateEvaluation);

    records.push_back({"c", "g2", std::nullopt, true, LogitVector({0.5, 0.4}), 0});
    const auto ev = evaluate_scorer(records, default_spec(ScorerKind::cs2));
    EXPECT_EQ(ev.novel_only.n_pos, 1u);
    EXPECT_EQ(ev.wrong_or_novel.n_pos, 2u);  // b is misclassified
    EXPECT_DOUBLE_EQ(ev.novel_only.auroc, 1.0);
}

TEST(EvaluateScorer, ZeroDenominatorNamesLine) {
    std::vector<LogitRecord> records;
    records.push_back({"a", "g1", 0, false, LogitVector({2.0, 0.0}), 7});
    records.push_back({"b", "g1", std::nullopt, true, LogitVector({2.0, 1.0}), 8});
    try {
        evaluate_scorer(records, default_spec(ScorerKind::cr));
        FAIL();
    } catch (const DivisionByZero& e) {
        EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
    }
}

TEST(EvaluateScorer, LogDomainRankingWhenExpOverflows) {
    std::vector<LogitRecord> records;
    records.push_back({"a", "g1", 0, false, LogitVector({900.0, 0.0}), 0});
    records.push_back({"b", "g1", 0, false, LogitVector({5.0, 0.0}), 0});
    records.push_back({"c", "g2", std::nullopt, true, LogitVector({1.0, 0.0}), 0});
    const auto ev = evaluate_scorer(records, default_spec(ScorerKind::lc_exp));
    EXPECT_EQ(ev.n_log_domain, 1u);
    EXPECT_DOUBLE_EQ(ev.novel_only.auroc, 1.0);
}

TEST(CurveCsv, HeaderAndRows) {
    const auto r = sweep(pos_neg({0}, {1}), PositiveDefinition::novel_only);
    const std::string csv = format_curve_csv(r);
    EXPECT_EQ(csv.rfind("threshold,detection_rate,false_alarm_rate,precision,recall\n", 0), 0u);
    EXPECT_NE(csv.find("-inf,0,0,1,0\n"), std::string::npos);
    EXPECT_NE(csv.find("0.5,1,0,1,1\n"), std::string::npos);
}
