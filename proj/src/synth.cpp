#include "nscore/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "nscore/csv_util.hpp"
#include "nscore/error.hpp"

namespace nscore {

void validate(const SynthConfig& c) {
    if (c.n_classes_seen == 0 || c.n_classes_novel == 0 || c.dim == 0 ||
        c.samples_per_class == 0 || c.n_groups == 0) {
        throw InvalidInput("synth config counts must be >= 1");
    }
    if (!(c.cluster_separation >= 0.0) || !std::isfinite(c.cluster_separation)) {
        throw InvalidInput("cluster_separation must be finite and >= 0");
    }
    if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
        throw InvalidInput("learning_rate must be finite and >= 0");
    }
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw InvalidInput("synth config: bad value for " + key + ": '" + value + "'");
    }
    return out;
}

std::string padded(std::size_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, i);
    return buf;
}

}  // namespace

SynthConfig parse_synth_config(std::string_view text, SynthConfig c) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key == "n_classes_seen") c.n_classes_seen = parse_number<std::size_t>(key, value);
        else if (key == "n_classes_novel") c.n_classes_novel = parse_number<std::size_t>(key, value);
        else if (key == "dim") c.dim = parse_number<std::size_t>(key, value);
        else if (key == "samples_per_class") c.samples_per_class = parse_number<std::size_t>(key, value);
        else if (key == "cluster_separation") c.cluster_separation = parse_number<double>(key, value);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
        else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
        else if (key == "n_groups") c.n_groups = parse_number<std::size_t>(key, value);
        else if (key == "novel_placement") {
            if (value == "midpoint") c.novel_placement = NovelPlacement::midpoint;
            else if (value == "far") c.novel_placement = NovelPlacement::far;
            else throw InvalidInput("synth config: novel_placement must be midpoint or far");
        } else {
            throw ParseError(line_no, "unknown synth config key '" + key + "'");
        }
    }
    validate(c);
    return c;
}

std::string format_synth_config(const SynthConfig& c) {
    std::string out;
    out += "n_classes_seen = " + std::to_string(c.n_classes_seen) + "\n";
    out += "n_classes_novel = " + std::to_string(c.n_classes_novel) + "\n";
    out += "dim = " + std::to_string(c.dim) + "\n";
    out += "samples_per_class = " + std::to_string(c.samples_per_class) + "\n";
    out += "cluster_separation = " + format_double(c.cluster_separation) + "\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "epochs = " + std::to_string(c.epochs) + "\n";
    out += "learning_rate = " + format_double(c.learning_rate) + "\n";
    out += std::string("novel_placement = ") +
           (c.novel_placement == NovelPlacement::midpoint ? "midpoint" : "far") + "\n";
    out += "n_groups = " + std::to_string(c.n_groups) + "\n";
    return out;
}

SynthData generate(const SynthConfig& config) {
    validate(config);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;

    auto sphere_point = [&](double radius) {
        std::vector<double> v(config.dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& x : v) {
                x = normal(rng);
                norm += x * x;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (double& x : v) x = x / norm * radius;
        return v;
    };

    SynthData data;
    for (std::size_t c = 0; c < config.n_classes_seen; ++c) {
        data.seen_means.push_back(sphere_point(config.cluster_separation));
    }
    for (std::size_t c = 0; c < config.n_classes_novel; ++c) {
        if (config.novel_placement == NovelPlacement::far || config.n_classes_seen < 2) {
            data.novel_means.push_back(sphere_point(2.0 * config.cluster_separation));
            continue;
        }
        const auto& a = data.seen_means[c % config.n_classes_seen];
        const auto& b = data.seen_means[(c + 1) % config.n_classes_seen];
        std::vector<double> mid(config.dim);
        for (std::size_t d = 0; d < config.dim; ++d) mid[d] = 0.5 * (a[d] + b[d]);
        data.novel_means.push_back(std::move(mid));
    }

    const int width = config.n_groups >= 100 ? 3 : 2;
    auto draw = [&](std::vector<FeatureRecord>& out, const std::string& prefix,
                    const std::vector<double>& mean, std::optional<int> label, bool novel) {
        for (std::size_t i = 0; i < config.samples_per_class; ++i) {
            FeatureRecord r;
            const std::size_t idx = out.size();
            r.sample_id = prefix + padded(idx, 6);
            r.group_id = "g" + padded(idx % config.n_groups + 1, width);
            r.true_class = label;
            r.is_novel = novel;
            r.features.resize(config.dim);
            for (std::size_t d = 0; d < config.dim; ++d) r.features[d] = mean[d] + normal(rng);
            out.push_back(std::move(r));
        }
    };

    for (std::size_t c = 0; c < config.n_classes_seen; ++c) {
        draw(data.train, "train_", data.seen_means[c], static_cast<int>(c), false);
    }
    for (std::size_t c = 0; c < config.n_classes_seen; ++c) {
        draw(data.test, "test_", data.seen_means[c], static_cast<int>(c), false);
    }
    for (std::size_t c = 0; c < config.n_classes_novel; ++c) {
        draw(data.test, "test_", data.novel_means[c], std::nullopt, true);
    }
    return data;
}

LinearSoftmaxModel::LinearSoftmaxModel(std::size_t n_classes, std::size_t dim)
    : n_classes_(n_classes), dim_(dim), weights_(n_classes * dim, 0.0), biases_(n_classes, 0.0) {
    if (n_classes == 0 || dim == 0) throw InvalidInput("model needs >= 1 class and >= 1 feature");
}

std::vector<double> LinearSoftmaxModel::logits(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw InvalidInput("feature dimension " + std::to_string(x.size()) +
                           " does not match model dimension " + std::to_string(dim_));
    }
    std::vector<double> out(biases_);
    for (std::size_t c = 0; c < n_classes_; ++c) {
        const double* w = weights_.data() + c * dim_;
        for (std::size_t d = 0; d < dim_; ++d) out[c] += w[d] * x[d];
    }
    return out;
}

namespace {

std::size_t label_of(const FeatureRecord& r, std::size_t n_classes) {
    if (r.is_novel || !r.true_class) {
        throw InvalidInput("training input contains novel record " + r.sample_id);
    }
    if (*r.true_class < 0 || static_cast<std::size_t>(*r.true_class) >= n_classes) {
        throw InvalidInput("record " + r.sample_id + " has class outside the model");
    }
    return static_cast<std::size_t>(*r.true_class);
}

// Softmax probabilities and log-sum-exp for one logit vector.
double softmax_inplace(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
    return m + std::log(s);
}

}  // namespace

double cross_entropy(const LinearSoftmaxModel& model, std::span<const FeatureRecord> records) {
    if (records.empty()) throw InvalidInput("cross-entropy of an empty record set");
    double total = 0.0;
    for (const auto& r : records) {
        const std::size_t y = label_of(r, model.n_classes());
        auto z = model.logits(r.features);
        const double target = z[y];
        total += softmax_inplace(z) - target;
    }
    return total / static_cast<double>(records.size());
}

ModelGradient cross_entropy_gradient(const LinearSoftmaxModel& model,
                                     std::span<const FeatureRecord> records) {
    if (records.empty()) throw InvalidInput("gradient of an empty record set");
    const std::size_t k = model.n_classes();
    const std::size_t dim = model.dim();
    ModelGradient g{std::vector<double>(k * dim, 0.0), std::vector<double>(k, 0.0)};
    const double scale = 1.0 / static_cast<double>(records.size());
    for (const auto& r : records) {
        const std::size_t y = label_of(r, k);
        auto p = model.logits(r.features);
        softmax_inplace(p);
        p[y] -= 1.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double coef = p[c] * scale;
            g.biases[c] += coef;
            double* w = g.weights.data() + c * dim;
            for (std::size_t d = 0; d < dim; ++d) w[d] += coef * r.features[d];
        }
    }
    return g;
}

double accuracy(const LinearSoftmaxModel& model, std::span<const FeatureRecord> records) {
    if (records.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : records) {
        const std::size_t y = label_of(r, model.n_classes());
        const auto z = model.logits(r.features);
        const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        hits += best == y;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

TrainResult train(std::span<const FeatureRecord> records, const SynthConfig& config,
                  bool safeguard) {
    validate(config);
    if (records.empty()) throw InvalidInput("no training records");
    for (const auto& r : records) label_of(r, config.n_classes_seen);

    TrainResult result{LinearSoftmaxModel(config.n_classes_seen, records.front().features.size()),
                       {}, config.learning_rate, 0.0};
    auto& model = result.model;
    double loss = cross_entropy(model, records);
    result.loss_history.push_back(loss);
    double lr = config.learning_rate;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const ModelGradient g = cross_entropy_gradient(model, records);
        while (true) {
            LinearSoftmaxModel next = model;
            for (std::size_t i = 0; i < g.weights.size(); ++i) next.weights()[i] -= lr * g.weights[i];
            for (std::size_t i = 0; i < g.biases.size(); ++i) next.biases()[i] -= lr * g.biases[i];
            const double next_loss = cross_entropy(next, records);
            if (!safeguard || next_loss <= loss || lr < 1e-12) {
                model = std::move(next);
                loss = next_loss;
                break;
            }
            lr *= 0.5;
        }
        result.loss_history.push_back(loss);
    }
    result.final_learning_rate = lr;
    result.train_accuracy = accuracy(model, records);
    return result;
}

std::vector<LogitRecord> emit_logits(const LinearSoftmaxModel& model,
                                     std::span<const FeatureRecord> records) {
    std::vector<LogitRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(LogitRecord{r.sample_id, r.group_id, r.true_class, r.is_novel,
                                  LogitVector(model.logits(r.features)), 0});
    }
    return out;
}

SynthBenchmark run_synth_benchmark(const SynthConfig& config) {
    SynthData data = generate(config);
    TrainResult training = train(data.train, config);
    auto logits = emit_logits(training.model, data.test);
    return SynthBenchmark{std::move(data), std::move(training), std::move(logits)};
}

}  // namespace nscore
