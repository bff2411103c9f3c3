#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nscore/dataio.hpp"

namespace nscore {

enum class NovelPlacement { midpoint, far };

struct SynthConfig {
    std::size_t n_classes_seen = 5;
    std::size_t n_classes_novel = 2;
    std::size_t dim = 5;
    std::size_t samples_per_class = 750;
    double cluster_separation = 8.0;
    std::uint64_t seed = 7;
    std::size_t epochs = 300;
    double learning_rate = 0.05;
    NovelPlacement novel_placement = NovelPlacement::midpoint;
    std::size_t n_groups = 10;
};

/// Throws InvalidInput on a zero count, negative separation or non-positive rate.
void validate(const SynthConfig& config);

/// Flat "key = value" lines; '#' starts a comment. Unknown keys are an error.
SynthConfig parse_synth_config(std::string_view text, SynthConfig base = {});
std::string format_synth_config(const SynthConfig& config);

struct FeatureRecord {
    std::string sample_id;
    std::string group_id;
    std::optional<int> true_class;
    bool is_novel = false;
    std::vector<double> features;
};

struct SynthData {
    std::vector<FeatureRecord> train;
    /// Seen classes first, then the novel clusters.
    std::vector<FeatureRecord> test;
    std::vector<std::vector<double>> seen_means;
    std::vector<std::vector<double>> novel_means;
};

SynthData generate(const SynthConfig& config);

class LinearSoftmaxModel {
public:
    LinearSoftmaxModel(std::size_t n_classes, std::size_t dim);

    std::size_t n_classes() const noexcept { return n_classes_; }
    std::size_t dim() const noexcept { return dim_; }

    /// Row-major n_classes x dim.
    std::vector<double>& weights() noexcept { return weights_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::vector<double>& biases() noexcept { return biases_; }
    const std::vector<double>& biases() const noexcept { return biases_; }

    double& weight(std::size_t c, std::size_t d) { return weights_[c * dim_ + d]; }

    /// W x + b.
    std::vector<double> logits(std::span<const double> x) const;

private:
    std::size_t n_classes_;
    std::size_t dim_;
    std::vector<double> weights_;
    std::vector<double> biases_;
};

struct ModelGradient {
    std::vector<double> weights;
    std::vector<double> biases;
};

/// Mean cross-entropy over the records' true classes.
double cross_entropy(const LinearSoftmaxModel& model, std::span<const FeatureRecord> records);
ModelGradient cross_entropy_gradient(const LinearSoftmaxModel& model,
                                     std::span<const FeatureRecord> records);

double accuracy(const LinearSoftmaxModel& model, std::span<const FeatureRecord> records);

struct TrainResult {
    LinearSoftmaxModel model;
    std::vector<double> loss_history;  // loss before the first step, then after each epoch
    double final_learning_rate = 0.0;
    double train_accuracy = 0.0;
};

/// Full-batch gradient descent from zero parameters. With the safeguard on, a step
/// that raises the loss is retried at half the rate.
TrainResult train(std::span<const FeatureRecord> records, const SynthConfig& config,
                  bool safeguard = true);

std::vector<LogitRecord> emit_logits(const LinearSoftmaxModel& model,
                                     std::span<const FeatureRecord> records);

struct SynthBenchmark {
    SynthData data;
    TrainResult training;
    std::vector<LogitRecord> test_logits;
};

/// generate -> train on the train split -> emit logits for the test split.
SynthBenchmark run_synth_benchmark(const SynthConfig& config);

}  // namespace nscore
