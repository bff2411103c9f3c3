#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nscore/error.hpp"
#include "nscore/synth.hpp"

using namespace nscore;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.dim = 4;
    c.samples_per_class = 60;
    c.epochs = 60;
    return c;
}

double rel_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace

TEST(Synth, GenerateIsDeterministic) {
    const auto a = generate(small_config());
    const auto b = generate(small_config());
    ASSERT_EQ(a.test.size(), b.test.size());
    for (std::size_t i = 0; i < a.test.size(); ++i) {
        EXPECT_EQ(a.test[i].features, b.test[i].features);
        EXPECT_EQ(a.test[i].group_id, b.test[i].group_id);
    }
    auto other = small_config();
    other.seed = 8;
    EXPECT_NE(generate(other).test[0].features, a.test[0].features);
}

TEST(Synth, SplitSizesAndAnnotations) {
    const auto cfg = small_config();
    const auto d = generate(cfg);
    EXPECT_EQ(d.train.size(), cfg.n_classes_seen * cfg.samples_per_class);
    EXPECT_EQ(d.test.size(), (cfg.n_classes_seen + cfg.n_classes_novel) * cfg.samples_per_class);
    for (const auto& r : d.train) EXPECT_FALSE(r.is_novel);
    std::size_t novel = 0;
    for (const auto& r : d.test) novel += r.is_novel ? 1 : 0;
    EXPECT_EQ(novel, cfg.n_classes_novel * cfg.samples_per_class);
    for (const auto& m : d.seen_means) {
        double n2 = 0.0;
        for (double v : m) n2 += v * v;
        EXPECT_NEAR(std::sqrt(n2), cfg.cluster_separation, 1e-9);
    }
}

TEST(Synth, ZeroSeparationGivesChanceAccuracy) {
    auto cfg = small_config();
    cfg.cluster_separation = 0.0;
    cfg.samples_per_class = 200;
    const auto bench = run_synth_benchmark(cfg);
    std::vector<FeatureRecord> seen;
    for (const auto& r : bench.data.test) {
        if (!r.is_novel) seen.push_back(r);
    }
    EXPECT_NEAR(accuracy(bench.training.model, seen), 1.0 / cfg.n_classes_seen, 0.1);
}

TEST(Synth, WellSeparatedClustersAreLearned) {
    SynthConfig cfg;
    cfg.dim = 16;
    cfg.samples_per_class = 200;
    const auto bench = run_synth_benchmark(cfg);
    EXPECT_GE(bench.training.train_accuracy, 0.99);
}

TEST(Synth, ZeroLearningRateLeavesModelUnchanged) {
    auto cfg = small_config();
    cfg.learning_rate = 0.0;
    cfg.epochs = 1;
    const auto d = generate(cfg);
    const auto t = train(d.train, cfg);
    for (double w : t.model.weights()) EXPECT_EQ(w, 0.0);
    for (double b : t.model.biases()) EXPECT_EQ(b, 0.0);
}

TEST(Synth, InseparableDataTrainsWithoutError) {
    std::vector<FeatureRecord> xor_data;
    int i = 0;
    for (double x : {-1.0, 1.0}) {
        for (double y : {-1.0, 1.0}) {
            for (int rep = 0; rep < 10; ++rep) {
                xor_data.push_back({"x" + std::to_string(i++), "g1", (x * y > 0) ? 1 : 0, false, {x, y}});
            }
        }
    }
    SynthConfig cfg;
    cfg.n_classes_seen = 2;
    cfg.dim = 2;
    cfg.epochs = 200;
    cfg.learning_rate = 0.5;
    const auto t = train(xor_data, cfg);
    EXPECT_LT(t.train_accuracy, 1.0);
}

TEST(Synth, LossIsNonIncreasing) {
    const auto cfg = small_config();
    const auto d = generate(cfg);
    const auto t = train(d.train, cfg);
    ASSERT_EQ(t.loss_history.size(), cfg.epochs + 1);
    for (std::size_t e = 1; e < t.loss_history.size(); ++e) {
        EXPECT_LE(t.loss_history[e], t.loss_history[e - 1] + 1e-9);
    }
    EXPECT_NEAR(t.loss_history.front(), std::log(static_cast<double>(cfg.n_classes_seen)), 1e-12);
}

TEST(Synth, GradientMatchesFiniteDifferences) {
    const auto cfg = small_config();
    const auto d = generate(cfg);
    std::mt19937_64 rng(61);
    std::normal_distribution<double> nd(0.0, 0.5);
    for (int point = 0; point < 20; ++point) {
        LinearSoftmaxModel m(cfg.n_classes_seen, cfg.dim);
        for (double& w : m.weights()) w = nd(rng);
        for (double& b : m.biases()) b = nd(rng);
        const auto g = cross_entropy_gradient(m, d.train);
        const double h = 1e-5;
        std::vector<double> fd_w(m.weights().size()), fd_b(m.biases().size());
        for (std::size_t i = 0; i < fd_w.size(); ++i) {
            auto p = m, q = m;
            p.weights()[i] += h;
            q.weights()[i] -= h;
            fd_w[i] = (cross_entropy(p, d.train) - cross_entropy(q, d.train)) / (2 * h);
        }
        for (std::size_t i = 0; i < fd_b.size(); ++i) {
            auto p = m, q = m;
            p.biases()[i] += h;
            q.biases()[i] -= h;
            fd_b[i] = (cross_entropy(p, d.train) - cross_entropy(q, d.train)) / (2 * h);
        }
        EXPECT_LT(rel_norm_diff(g.weights, fd_w), 1e-5);
        EXPECT_LT(rel_norm_diff(g.biases, fd_b), 1e-5);
    }
}

TEST(Synth, NovelRecordsCannotBeTrainedOn) {
    const auto d = generate(small_config());
    std::vector<FeatureRecord> bad{d.train.front(), d.test.back()};
    ASSERT_TRUE(bad.back().is_novel);
    LinearSoftmaxModel m(5, small_config().dim);
    EXPECT_THROW(cross_entropy(m, bad), InvalidInput);
    EXPECT_THROW(train(bad, small_config()), InvalidInput);
}

TEST(Model, Logits) {
    LinearSoftmaxModel zero(3, 2);
    EXPECT_EQ(zero.logits(std::vector<double>{4.0, -1.0}), (std::vector<double>{0, 0, 0}));

    LinearSoftmaxModel one(1, 1);
    one.weight(0, 0) = 1.0;
    EXPECT_EQ(one.logits(std::vector<double>{2.5}), (std::vector<double>{2.5}));
    EXPECT_THROW(one.logits(std::vector<double>{1.0, 2.0}), InvalidInput);
}

TEST(Model, EmitLogitsCarriesAnnotations) {
    const auto bench = run_synth_benchmark(small_config());
    ASSERT_EQ(bench.test_logits.size(), bench.data.test.size());
    for (std::size_t i = 0; i < bench.test_logits.size(); ++i) {
        EXPECT_EQ(bench.test_logits[i].sample_id, bench.data.test[i].sample_id);
        EXPECT_EQ(bench.test_logits[i].is_novel, bench.data.test[i].is_novel);
        EXPECT_EQ(bench.test_logits[i].logits.size(), small_config().n_classes_seen);
    }
}

TEST(Config, ParseAndFormatRoundTrip) {
    const auto c = parse_synth_config("# demo\ndim = 7\nseed=11\nnovel_placement = far\n");
    EXPECT_EQ(c.dim, 7u);
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.novel_placement, NovelPlacement::far);
    EXPECT_EQ(c.samples_per_class, SynthConfig{}.samples_per_class);
    const auto back = parse_synth_config(format_synth_config(c));
    EXPECT_EQ(format_synth_config(back), format_synth_config(c));
    EXPECT_THROW(parse_synth_config("bogus = 1\n"), ParseError);
    EXPECT_THROW(parse_synth_config("dim = 0\n"), InvalidInput);
    EXPECT_THROW(parse_synth_config("cluster_separation = -1\n"), InvalidInput);
}
