#include "nscore/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nscore/csv_util.hpp"
#include "nscore/dataio.hpp"
#include "nscore/density.hpp"
#include "nscore/error.hpp"
#include "nscore/eval.hpp"
#include "nscore/scores.hpp"
#include "nscore/stats.hpp"
#include "nscore/synth.hpp"

namespace nscore {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kOutDirEnv = "NSCORE_OUT_DIR";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string absolute_path(const std::string& p) {
    if (p.empty()) return p;
    return fs::absolute(fs::path(p)).lexically_normal().string();
}

std::string default_out(const std::string& given, const char* leaf) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) {
        return leaf ? (fs::path(env) / leaf).string() : std::string(env);
    }
    throw UsageError(std::string("--out is required (or set ") + kOutDirEnv + ")");
}

std::string valid_scorer_names() {
    std::string names;
    for (ScorerKind k : all_scorer_kinds()) {
        if (!names.empty()) names += ", ";
        names += scorer_name(k);
    }
    return names;
}

ScorerKind parse_scorer(const std::string& name) {
    if (auto k = parse_scorer_name(name)) return *k;
    throw UsageError("unknown scorer '" + name + "'; valid names: " + valid_scorer_names());
}

/// "all" or a comma list; result in the fixed reporting order.
std::vector<ScorerKind> parse_scorer_list(const std::string& text) {
    if (text == "all") return all_scorer_kinds();
    std::set<ScorerKind> chosen;
    for (auto part : split_csv_line(text)) {
        if (part.empty()) continue;
        chosen.insert(parse_scorer(std::string(part)));
    }
    if (chosen.empty()) throw UsageError("no scorers selected");
    std::vector<ScorerKind> out;
    for (ScorerKind k : all_scorer_kinds()) {
        if (chosen.count(k)) out.push_back(k);
    }
    return out;
}

ScorerSpec make_spec(ScorerKind kind, const std::string& identity_orientation) {
    ScorerSpec spec = default_spec(kind);
    if (kind == ScorerKind::lc_identity && identity_orientation == "sign") {
        spec.orientation = Orientation::high_means_sign;
    }
    return spec;
}

std::vector<std::string> name_list(const std::vector<ScorerKind>& kinds) {
    std::vector<std::string> out;
    for (ScorerKind k : kinds) out.emplace_back(scorer_name(k));
    return out;
}

std::string join_names(const std::vector<ScorerKind>& kinds) {
    std::string out;
    for (ScorerKind k : kinds) {
        if (!out.empty()) out += ',';
        out += scorer_name(k);
    }
    return out;
}

/// Collects files for one output set and writes each atomically.
class OutputSet {
public:
    explicit OutputSet(fs::path root) : root_(std::move(root)) {}

    void write(const std::string& rel, std::string_view content) {
        write_file_atomic(root_ / rel, content);
        files_.push_back(rel);
    }

    const fs::path& root() const noexcept { return root_; }
    std::vector<std::string> files() const {
        auto f = files_;
        std::sort(f.begin(), f.end());
        return f;
    }
    void adopt(const std::string& prefix, const OutputSet& child) {
        for (const auto& f : child.files_) files_.push_back(prefix + "/" + f);
    }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

json manifest_base(const std::string& command, const std::vector<std::string>& args) {
    json m;
    m["tool"] = "nscore";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["args"] = args;
    return m;
}

// ---------------------------------------------------------------- options

struct FoldOptions {
    std::string mode = "pooled";
    std::size_t window = 3;
    std::size_t n_folds = 10;
    std::size_t cycle = 0;

    void add(CLI::App* app) {
        app->add_option("--folds", mode, "pooled or per-fold")
            ->check(CLI::IsMember({"pooled", "per-fold"}));
        app->add_option("--window", window, "test groups per fold");
        app->add_option("--n-folds", n_folds, "number of folds");
        app->add_option("--cycle", cycle, "rotation cycle length (0 = n-folds)");
    }
    void append(std::vector<std::string>& a) const {
        a.insert(a.end(), {"--folds", mode, "--window", std::to_string(window), "--n-folds",
                           std::to_string(n_folds), "--cycle", std::to_string(cycle)});
    }
    json to_json() const {
        return {{"mode", mode}, {"window", window}, {"n_folds", n_folds}, {"cycle", cycle}};
    }
    bool per_fold() const { return mode == "per-fold"; }
};

struct SynthOptions {
    std::string config_file;
    SynthConfig config;
    std::string placement = "midpoint";

    void add(CLI::App* app) {
        app->add_option("--config", config_file, "key=value synth config file");
        app->add_option("--n-seen", config.n_classes_seen, "seen classes");
        app->add_option("--n-novel", config.n_classes_novel, "novel classes");
        app->add_option("--dim", config.dim, "feature dimension");
        app->add_option("--samples", config.samples_per_class, "samples per class and split");
        app->add_option("--separation", config.cluster_separation, "radius of the class-mean sphere");
        app->add_option("--seed", config.seed, "generator seed");
        app->add_option("--epochs", config.epochs, "gradient descent epochs");
        app->add_option("--lr", config.learning_rate, "learning rate");
        app->add_option("--placement", placement, "novel cluster placement")
            ->check(CLI::IsMember({"midpoint", "far"}));
        app->add_option("--n-groups", config.n_groups, "round-robin group count");
    }

    // Flags given on the command line override the config file.
    SynthConfig resolve(const CLI::App* app) const {
        SynthConfig c = config;
        c.novel_placement = placement == "far" ? NovelPlacement::far : NovelPlacement::midpoint;
        if (config_file.empty()) {
            validate(c);
            return c;
        }
        SynthConfig from_file = parse_synth_config(read_file(config_file));
        auto given = [&](const char* flag) { return app->count(flag) > 0; };
        if (given("--n-seen")) from_file.n_classes_seen = c.n_classes_seen;
        if (given("--n-novel")) from_file.n_classes_novel = c.n_classes_novel;
        if (given("--dim")) from_file.dim = c.dim;
        if (given("--samples")) from_file.samples_per_class = c.samples_per_class;
        if (given("--separation")) from_file.cluster_separation = c.cluster_separation;
        if (given("--seed")) from_file.seed = c.seed;
        if (given("--epochs")) from_file.epochs = c.epochs;
        if (given("--lr")) from_file.learning_rate = c.learning_rate;
        if (given("--placement")) from_file.novel_placement = c.novel_placement;
        if (given("--n-groups")) from_file.n_groups = c.n_groups;
        validate(from_file);
        return from_file;
    }

    static void append(std::vector<std::string>& a, const SynthConfig& c) {
        a.insert(a.end(),
                 {"--n-seen", std::to_string(c.n_classes_seen), "--n-novel",
                  std::to_string(c.n_classes_novel), "--dim", std::to_string(c.dim), "--samples",
                  std::to_string(c.samples_per_class), "--separation",
                  format_double(c.cluster_separation), "--seed", std::to_string(c.seed),
                  "--epochs", std::to_string(c.epochs), "--lr", format_double(c.learning_rate),
                  "--placement",
                  c.novel_placement == NovelPlacement::far ? "far" : "midpoint", "--n-groups",
                  std::to_string(c.n_groups)});
    }
};

struct StatsOptions {
    std::uint64_t seed = LillieforsOptions{}.seed;
    std::size_t simulations = LillieforsOptions{}.simulations;

    void add(CLI::App* app) {
        app->add_option("--mc-seed", seed, "Lilliefors Monte Carlo seed");
        app->add_option("--simulations", simulations, "Lilliefors Monte Carlo draws");
    }
    void append(std::vector<std::string>& a) const {
        a.insert(a.end(), {"--mc-seed", std::to_string(seed), "--simulations",
                           std::to_string(simulations)});
    }
};

// ---------------------------------------------------------------- builders

std::string scores_csv(const std::vector<LogitRecord>& records, const ScorerSpec& spec) {
    std::string out = "sample_id,group,raw,oriented,flags\n";
    for (const auto& r : records) {
        ScoreValue v;
        try {
            v = score(spec, r.logits);
        } catch (const DivisionByZero& e) {
            const std::string where =
                r.line > 0 ? "line " + std::to_string(r.line) : "sample " + r.sample_id;
            throw DivisionByZero(where + ": " + e.what());
        }
        const auto group = classify_outcome(r.true_class, r.is_novel, argmax_pair(r.logits).first);
        out += r.sample_id + ',' + std::string(group_name(group)) + ',' + format_double(v.raw) +
               ',' + format_double(v.oriented) + ',' + describe_flags(v.flags) + '\n';
    }
    return out;
}

std::string metric_fields(const CurveReport& r) {
    return format_double(r.auroc) + ',' + format_double(r.aupr) + ',' + std::to_string(r.n_pos) +
           ',' + std::to_string(r.n_neg) + '\n';
}

std::string summary_row(ScorerKind kind, const CurveReport& r) {
    return std::string(scorer_name(kind)) + ',' + metric_fields(r);
}

struct EvaluateSettings {
    std::vector<ScorerKind> scorers;
    std::string positive = "both";
    std::string thresholds = "all";
    std::string identity_orientation = "nonsign";
    FoldOptions folds;
};

ThresholdCount parse_thresholds(const std::string& text) {
    if (text == "all") return std::nullopt;
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoul(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw UsageError("--thresholds must be 'all' or a count, got '" + text + "'");
    }
    return n;
}

void run_evaluate(const std::vector<LogitRecord>& records, const EvaluateSettings& s,
                  OutputSet& out) {
    const bool want_novel = s.positive != "wrong-or-novel";
    const bool want_won = s.positive != "novel";
    const ThresholdCount thresholds = parse_thresholds(s.thresholds);

    const std::string header = "scorer,auroc,aupr,n_pos,n_neg\n";
    std::string sum_novel = header;
    std::string sum_won = header;
    std::string table = "scorer,AUC,ROC\n";
    std::string flags = "scorer,n_unreliable,n_clamped,n_log_domain\n";

    for (ScorerKind kind : s.scorers) {
        const ScorerSpec spec = make_spec(kind, s.identity_orientation);
        const auto samples = score_records(records, spec);
        std::optional<CurveReport> novel;
        std::optional<CurveReport> won;
        if (want_novel) novel = sweep(samples, PositiveDefinition::novel_only, thresholds);
        if (want_won) won = sweep(samples, PositiveDefinition::wrong_or_novel, thresholds);

        std::size_t unreliable = 0, clamped = 0, log_domain = 0;
        for (const auto& r : records) {
            const ScoreValue v = score(spec, r.logits);
            unreliable += v.has(flag_unreliable);
            clamped += v.has(flag_clamped);
            log_domain += v.has(flag_log_domain);
        }
        flags += std::string(scorer_name(kind)) + ',' + std::to_string(unreliable) + ',' +
                 std::to_string(clamped) + ',' + std::to_string(log_domain) + '\n';

        const std::string name(scorer_name(kind));
        if (novel) {
            sum_novel += summary_row(kind, *novel);
            out.write("curves/" + name + "_novel_only.csv", format_curve_csv(*novel));
        }
        if (won) {
            sum_won += summary_row(kind, *won);
            out.write("curves/" + name + "_wrong_or_novel.csv", format_curve_csv(*won));
        }
        if (novel && won) {
            table += name + ',' + format_double(won->aupr) + ',' + format_double(novel->auroc) + '\n';
        }
    }
    if (want_novel) out.write("summary_novel_only.csv", sum_novel);
    if (want_won) out.write("summary_wrong_or_novel.csv", sum_won);
    if (want_novel && want_won) out.write("table.csv", table);
    out.write("flags.csv", flags);

    if (s.folds.per_fold()) {
        const FoldPlan plan = make_fold_plan(sign_group_ids(records), s.folds.window,
                                             s.folds.n_folds, s.folds.cycle);
        out.write("fold_plan.csv", format_fold_plan_csv(plan));
        std::string per_fold = "fold,scorer,positive,auroc,aupr,n_pos,n_neg\n";
        for (ScorerKind kind : s.scorers) {
            const ScorerSpec spec = make_spec(kind, s.identity_orientation);
            const FoldEvaluation fe = evaluate_scorer_per_fold(records, spec, plan);
            const std::string name(scorer_name(kind));
            for (std::size_t f = 0; f < fe.per_fold.size(); ++f) {
                const auto& ev = fe.per_fold[f];
                const std::string idx = std::to_string(plan.folds[f].index);
                if (want_novel) {
                    per_fold += idx + ',' + name + ",novel_only," + metric_fields(ev.novel_only);
                }
                if (want_won) {
                    per_fold += idx + ',' + name + ",wrong_or_novel," + metric_fields(ev.wrong_or_novel);
                }
            }
            if (want_novel) {
                per_fold += "mean," + name + ",novel_only," + format_double(fe.mean_auroc_novel_only) +
                            ',' + format_double(fe.mean_aupr_novel_only) + ",,\n";
            }
            if (want_won) {
                per_fold += "mean," + name + ",wrong_or_novel," +
                            format_double(fe.mean_auroc_wrong_or_novel) + ',' +
                            format_double(fe.mean_aupr_wrong_or_novel) + ",,\n";
            }
        }
        out.write("summary_per_fold.csv", per_fold);
    }
}

std::string comparison_rows(const std::string& prefix, ScorerKind kind, const GroupComparison& g) {
    std::string out;
    auto row = [&](const char* name, const TestResult& t) {
        out += prefix + std::string(scorer_name(kind)) + ',' + name + ',' +
               format_double(t.statistic) + ',' + format_double(t.p_value) + ',' +
               std::string(method_name(t.method)) + ',' + std::to_string(t.n1) + ',' +
               std::to_string(t.n2) + ',' + (t.p_value < 0.01 ? "1" : "0") + '\n';
    };
    row("CP-IP", g.cp_ip);
    row("CP-NS", g.cp_ns);
    row("IP-NS", g.ip_ns);
    return out;
}

void run_stats(const std::vector<LogitRecord>& records, const std::vector<ScorerKind>& scorers,
               const std::string& identity_orientation, const StatsOptions& so,
               const FoldOptions& folds, OutputSet& out) {
    LillieforsNullCache nulls({so.simulations, so.seed});
    const std::string header = "scorer,comparison,statistic,p_value,method,n1,n2,significant_at_0.01\n";
    std::string comparisons = header;
    std::string normality = "scorer,group,statistic,p_value,method,n,rejected_at_0.05\n";
    for (ScorerKind kind : scorers) {
        const ScorerSpec spec = make_spec(kind, identity_orientation);
        const auto samples = score_records(records, spec);
        const GroupComparison g = group_comparison(samples, nulls);
        comparisons += comparison_rows("", kind, g);
        for (std::size_t grp = 0; grp < 3; ++grp) {
            const auto& n = g.normality[grp];
            normality += std::string(scorer_name(kind)) + ',' +
                         std::string(group_name(static_cast<OutcomeGroup>(grp))) + ',';
            if (n) {
                normality += format_double(n->test.statistic) + ',' + format_double(n->test.p_value) +
                             ",monte_carlo," + std::to_string(n->test.n1) + ',' +
                             (n->rejected ? "1" : "0") + '\n';
            } else {
                normality += ",,skipped,,\n";
            }
        }
    }
    out.write("group_comparison.csv", comparisons);
    out.write("normality.csv", normality);

    if (folds.per_fold()) {
        const FoldPlan plan =
            make_fold_plan(sign_group_ids(records), folds.window, folds.n_folds, folds.cycle);
        std::string per_fold = "fold," + header;
        for (const auto& fold : plan.folds) {
            const auto test = split_fold(records, fold).test;
            for (ScorerKind kind : scorers) {
                const auto samples = score_records(test, make_spec(kind, identity_orientation));
                per_fold += comparison_rows(std::to_string(fold.index) + ',', kind,
                                            group_comparison(samples, nulls));
            }
        }
        out.write("group_comparison_per_fold.csv", per_fold);
    }
}

struct DensitySettings {
    std::vector<ScorerKind> scorers;
    std::string groups = "ss-vs-ns";
    bool log10 = false;
    std::size_t grid = 512;
    bool svg = false;
    std::string identity_orientation = "nonsign";
};

void run_density(const std::vector<LogitRecord>& records, const DensitySettings& s,
                 OutputSet& out) {
    const bool combined = s.groups == "ss-vs-ns";
    const std::vector<std::string> names =
        combined ? std::vector<std::string>{"SS", "NS"} : std::vector<std::string>{"CP", "IP", "NS"};
    std::string meta = "scorer,group,n,bandwidth,log10,dropped_nonpositive,status\n";

    for (ScorerKind kind : s.scorers) {
        const ScorerSpec spec = make_spec(kind, s.identity_orientation);
        std::vector<std::vector<double>> values(names.size());
        for (const auto& r : records) {
            const ScoreValue v = score(spec, r.logits);
            const auto g = classify_outcome(r.true_class, r.is_novel, argmax_pair(r.logits).first);
            std::size_t slot = 0;
            if (combined) {
                slot = g == OutcomeGroup::NS ? 1 : 0;
            } else {
                slot = static_cast<std::size_t>(g);
            }
            values[slot].push_back(v.has(flag_log_domain) ? *v.log_raw : v.raw);
        }

        const std::string name(scorer_name(kind));
        std::string box = "group,min,q1,median,q3,max,lower_whisker,upper_whisker,outlier_count\n";
        std::vector<DensityCurve> curves(names.size());
        std::vector<bool> have(names.size(), false);
        for (std::size_t gi = 0; gi < names.size(); ++gi) {
            std::vector<double> xs = values[gi];
            std::size_t dropped = 0;
            if (s.log10) {
                auto t = log10_positive(xs);
                xs = std::move(t.values);
                dropped = t.dropped;
            }
            std::string status = "ok";
            std::string bw;
            try {
                curves[gi] = kde(xs, s.grid);
                have[gi] = true;
                bw = format_double(curves[gi].bandwidth);
                std::string csv = "score,density\n";
                for (std::size_t i = 0; i < curves[gi].grid.size(); ++i) {
                    csv += format_double(curves[gi].grid[i]) + ',' +
                           format_double(curves[gi].density[i]) + '\n';
                }
                out.write("density_" + name + "_" + names[gi] + ".csv", csv);
            } catch (const InvalidInput& e) {
                status = std::string("skipped: ") + e.what();
            }
            meta += name + ',' + names[gi] + ',' + std::to_string(xs.size()) + ',' + bw + ',' +
                    (s.log10 ? "1" : "0") + ',' + std::to_string(dropped) + ',' + status + '\n';
            if (!xs.empty()) {
                const BoxplotSummary b = boxplot_summary(xs);
                box += names[gi] + ',' + format_double(b.min) + ',' + format_double(b.q1) + ',' +
                       format_double(b.median) + ',' + format_double(b.q3) + ',' +
                       format_double(b.max) + ',' + format_double(b.lower_whisker) + ',' +
                       format_double(b.upper_whisker) + ',' + std::to_string(b.outliers.size()) +
                       '\n';
            }
        }
        out.write("boxplot_" + name + ".csv", box);
        if (s.svg) {
            std::vector<SvgSeries> series;
            for (std::size_t gi = 0; gi < names.size(); ++gi) {
                if (have[gi]) series.push_back({names[gi], &curves[gi]});
            }
            out.write("density_" + name + ".svg",
                      render_density_svg(name + (s.log10 ? " (log10)" : ""), series));
        }
    }
    out.write("density_meta.csv", meta);
}

void write_manifest(OutputSet& out, const fs::path& manifest_path, json manifest) {
    manifest["outputs"] = out.files();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

void add_identity_orientation(CLI::App* app, std::string& target) {
    app->add_option("--identity-orientation", target,
                    "orientation of lc_identity: nonsign (high value = non-sign) or sign")
        ->check(CLI::IsMember({"nonsign", "sign"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("nscore");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Confidence and latent-cognizance scores for flagging novel inputs"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark logit CSV");
    SynthOptions synth_opts;
    std::string synth_out;
    std::string synth_train_out;
    synth_opts.add(synth);
    synth->add_option("--out", synth_out, "test logit CSV path");
    synth->add_option("--train-out", synth_train_out, "optional training-split logit CSV path");

    // score
    auto* score_cmd = app.add_subcommand("score", "score every record with one scorer");
    std::string score_input, score_scorer, score_out, score_identity = "nonsign";
    score_cmd->add_option("--input", score_input, "logit CSV")->required();
    score_cmd->add_option("--scorer", score_scorer, "scorer name")->required();
    score_cmd->add_option("--out", score_out, "scored CSV path");
    add_identity_orientation(score_cmd, score_identity);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "AUROC / AUPR tables and curves");
    std::string eval_input, eval_scorers = "all", eval_out;
    EvaluateSettings eval_settings;
    eval_cmd->add_option("--input", eval_input, "logit CSV")->required();
    eval_cmd->add_option("--scorers", eval_scorers, "all or comma list");
    eval_cmd->add_option("--positive", eval_settings.positive, "novel, wrong-or-novel or both")
        ->check(CLI::IsMember({"novel", "wrong-or-novel", "both"}));
    eval_cmd->add_option("--thresholds", eval_settings.thresholds,
                         "curve thresholds: all or an evenly spaced count");
    eval_cmd->add_option("--out", eval_out, "output directory");
    add_identity_orientation(eval_cmd, eval_settings.identity_orientation);
    eval_settings.folds.add(eval_cmd);

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "CP/IP/NS rank-sum and normality tests");
    std::string stats_input, stats_scorers = "all", stats_out, stats_identity = "nonsign";
    StatsOptions stats_opts;
    FoldOptions stats_folds;
    stats_cmd->add_option("--input", stats_input, "logit CSV")->required();
    stats_cmd->add_option("--scorers", stats_scorers, "all or comma list");
    stats_cmd->add_option("--out", stats_out, "output directory");
    add_identity_orientation(stats_cmd, stats_identity);
    stats_opts.add(stats_cmd);
    stats_folds.add(stats_cmd);

    // density
    auto* dens_cmd = app.add_subcommand("density", "smoothed densities and boxplot summaries");
    std::string dens_input, dens_scorers = "all", dens_out;
    DensitySettings dens_settings;
    dens_cmd->add_option("--input", dens_input, "logit CSV")->required();
    dens_cmd->add_option("--scorers", dens_scorers, "all or comma list");
    dens_cmd->add_option("--groups", dens_settings.groups, "ss-vs-ns or cp-ip-ns")
        ->check(CLI::IsMember({"ss-vs-ns", "cp-ip-ns"}));
    dens_cmd->add_flag("--log", dens_settings.log10, "log10 of positive scores");
    dens_cmd->add_option("--grid", dens_settings.grid, "grid points");
    dens_cmd->add_flag("--svg", dens_settings.svg, "also write an SVG per scorer");
    dens_cmd->add_option("--out", dens_out, "output directory");
    add_identity_orientation(dens_cmd, dens_settings.identity_orientation);

    // report
    auto* report_cmd = app.add_subcommand("report", "score, evaluate, stats and density in one directory");
    std::string report_input, report_scorers = "all", report_out;
    SynthOptions report_synth;
    EvaluateSettings report_eval;
    StatsOptions report_stats;
    DensitySettings report_density;
    report_cmd->add_option("--input", report_input, "logit CSV (omit to synthesize)");
    report_cmd->add_option("--scorers", report_scorers, "all or comma list");
    report_cmd->add_option("--out", report_out, "output directory");
    report_cmd->add_option("--groups", report_density.groups, "ss-vs-ns or cp-ip-ns")
        ->check(CLI::IsMember({"ss-vs-ns", "cp-ip-ns"}));
    report_cmd->add_flag("--log", report_density.log10, "log10 densities");
    report_cmd->add_flag("--svg", report_density.svg, "SVG density plots");
    add_identity_orientation(report_cmd, report_eval.identity_orientation);
    report_synth.add(report_cmd);
    report_stats.add(report_cmd);
    report_eval.folds.add(report_cmd);

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    std::string replay_manifest, replay_out;
    replay_cmd->add_option("manifest", replay_manifest, "manifest.json")->required();
    replay_cmd->add_option("--out", replay_out, "override the recorded output location");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            const SynthConfig cfg = synth_opts.resolve(synth);
            const std::string out = absolute_path(default_out(synth_out, "logits.csv"));
            const std::string train_out = absolute_path(synth_train_out);
            const SynthBenchmark bench = run_synth_benchmark(cfg);
            write_logit_csv(out, bench.test_logits);
            std::vector<std::string> args{"synth"};
            SynthOptions::append(args, cfg);
            args.insert(args.end(), {"--out", out});
            json m = manifest_base("synth", args);
            m["outputs"] = {out};
            if (!train_out.empty()) {
                write_logit_csv(train_out, emit_logits(bench.training.model, bench.data.train));
                args.insert(args.end(), {"--train-out", train_out});
                m["args"] = args;
                m["outputs"].push_back(train_out);
            }
            m["seed"] = cfg.seed;
            m["synth_config"] = format_synth_config(cfg);
            m["train_accuracy"] = format_double(bench.training.train_accuracy);
            write_file_atomic(out + ".manifest.json", m.dump(2) + "\n");
            return 0;
        }

        if (score_cmd->parsed()) {
            const ScorerSpec spec = make_spec(parse_scorer(score_scorer), score_identity);
            const std::string input = absolute_path(score_input);
            const std::string out = absolute_path(default_out(score_out, "scores.csv"));
            const auto records = read_logit_csv(input);
            write_file_atomic(out, scores_csv(records, spec));
            json m = manifest_base("score", {"score", "--input", input, "--scorer", score_scorer,
                                             "--identity-orientation", score_identity, "--out",
                                             out});
            m["inputs"] = {input};
            m["outputs"] = {out};
            m["scorers"] = {score_scorer};
            write_file_atomic(out + ".manifest.json", m.dump(2) + "\n");
            return 0;
        }

        if (eval_cmd->parsed()) {
            eval_settings.scorers = parse_scorer_list(eval_scorers);
            const std::string input = absolute_path(eval_input);
            const std::string out_dir = absolute_path(default_out(eval_out, nullptr));
            const auto records = read_logit_csv(input);
            OutputSet out(out_dir);
            run_evaluate(records, eval_settings, out);
            std::vector<std::string> args{"evaluate", "--input", input, "--scorers",
                                          join_names(eval_settings.scorers), "--positive",
                                          eval_settings.positive, "--thresholds",
                                          eval_settings.thresholds, "--identity-orientation",
                                          eval_settings.identity_orientation};
            eval_settings.folds.append(args);
            args.insert(args.end(), {"--out", out_dir});
            json m = manifest_base("evaluate", args);
            m["inputs"] = {input};
            m["scorers"] = name_list(eval_settings.scorers);
            m["folds"] = eval_settings.folds.to_json();
            write_manifest(out, fs::path(out_dir) / "manifest.json", m);
            return 0;
        }

        if (stats_cmd->parsed()) {
            const auto scorers = parse_scorer_list(stats_scorers);
            const std::string input = absolute_path(stats_input);
            const std::string out_dir = absolute_path(default_out(stats_out, nullptr));
            const auto records = read_logit_csv(input);
            OutputSet out(out_dir);
            run_stats(records, scorers, stats_identity, stats_opts, stats_folds, out);
            std::vector<std::string> args{"stats", "--input", input, "--scorers",
                                          join_names(scorers), "--identity-orientation",
                                          stats_identity};
            stats_opts.append(args);
            stats_folds.append(args);
            args.insert(args.end(), {"--out", out_dir});
            json m = manifest_base("stats", args);
            m["inputs"] = {input};
            m["scorers"] = name_list(scorers);
            m["seed"] = stats_opts.seed;
            m["folds"] = stats_folds.to_json();
            write_manifest(out, fs::path(out_dir) / "manifest.json", m);
            return 0;
        }

        if (dens_cmd->parsed()) {
            dens_settings.scorers = parse_scorer_list(dens_scorers);
            const std::string input = absolute_path(dens_input);
            const std::string out_dir = absolute_path(default_out(dens_out, nullptr));
            const auto records = read_logit_csv(input);
            OutputSet out(out_dir);
            run_density(records, dens_settings, out);
            std::vector<std::string> args{"density", "--input", input, "--scorers",
                                          join_names(dens_settings.scorers), "--groups",
                                          dens_settings.groups, "--grid",
                                          std::to_string(dens_settings.grid),
                                          "--identity-orientation",
                                          dens_settings.identity_orientation};
            if (dens_settings.log10) args.push_back("--log");
            if (dens_settings.svg) args.push_back("--svg");
            args.insert(args.end(), {"--out", out_dir});
            json m = manifest_base("density", args);
            m["inputs"] = {input};
            m["scorers"] = name_list(dens_settings.scorers);
            write_manifest(out, fs::path(out_dir) / "manifest.json", m);
            return 0;
        }

        if (report_cmd->parsed()) {
            const auto scorers = parse_scorer_list(report_scorers);
            const std::string out_dir = absolute_path(default_out(report_out, nullptr));
            OutputSet out(out_dir);
            std::vector<std::string> args{"report"};
            json m;
            std::vector<LogitRecord> records;
            if (report_input.empty()) {
                const SynthConfig cfg = report_synth.resolve(report_cmd);
                records = run_synth_benchmark(cfg).test_logits;
                out.write("data/logits.csv", format_logit_csv(records));
                out.write("data/synth_config.txt", format_synth_config(cfg));
                records = read_logit_csv(out.root() / "data/logits.csv");
                SynthOptions::append(args, cfg);
                m["seed"] = cfg.seed;
            } else {
                const std::string input = absolute_path(report_input);
                records = read_logit_csv(input);
                args.insert(args.end(), {"--input", input});
                m["inputs"] = {input};
            }

            for (ScorerKind kind : scorers) {
                const ScorerSpec spec = make_spec(kind, report_eval.identity_orientation);
                out.write("scores/" + std::string(scorer_name(kind)) + ".csv",
                          scores_csv(records, spec));
            }
            report_eval.scorers = scorers;
            OutputSet eval_out(out.root() / "evaluate");
            run_evaluate(records, report_eval, eval_out);
            out.adopt("evaluate", eval_out);

            OutputSet stats_out_set(out.root() / "stats");
            run_stats(records, scorers, report_eval.identity_orientation, report_stats,
                      report_eval.folds, stats_out_set);
            out.adopt("stats", stats_out_set);

            report_density.scorers = scorers;
            report_density.identity_orientation = report_eval.identity_orientation;
            OutputSet dens_out_set(out.root() / "density");
            run_density(records, report_density, dens_out_set);
            out.adopt("density", dens_out_set);

            args.insert(args.end(), {"--scorers", join_names(scorers), "--groups",
                                     report_density.groups, "--identity-orientation",
                                     report_eval.identity_orientation});
            if (report_density.log10) args.push_back("--log");
            if (report_density.svg) args.push_back("--svg");
            report_stats.append(args);
            report_eval.folds.append(args);
            args.insert(args.end(), {"--out", out_dir});

            json base = manifest_base("report", args);
            base.update(m);
            base["scorers"] = name_list(scorers);
            base["folds"] = report_eval.folds.to_json();
            base["mc_seed"] = report_stats.seed;
            write_manifest(out, fs::path(out_dir) / "manifest.json", base);
            return 0;
        }

        if (replay_cmd->parsed()) {
            json m;
            try {
                m = json::parse(read_file(replay_manifest));
            } catch (const json::exception& e) {
                throw Error("manifest " + replay_manifest + " is not valid JSON: " + e.what());
            }
            if (!m.contains("args") || !m["args"].is_array()) {
                throw Error("manifest " + replay_manifest + " has no args array");
            }
            auto args = m["args"].get<std::vector<std::string>>();
            if (!replay_out.empty()) {
                const std::string out = absolute_path(replay_out);
                auto it = std::find(args.begin(), args.end(), "--out");
                if (it == args.end() || std::next(it) == args.end()) {
                    args.insert(args.end(), {"--out", out});
                } else {
                    *std::next(it) = out;
                }
            }
            return run_cli(args);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace nscore
