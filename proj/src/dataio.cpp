#include "nscore/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "nscore/csv_util.hpp"
#include "nscore/error.hpp"

namespace nscore {

void validate_annotation(const std::optional<int>& true_class, bool is_novel) {
    if (true_class.has_value() && is_novel) {
        throw InvalidRecord("record has both a true class and the novel flag");
    }
    if (!true_class.has_value() && !is_novel) {
        throw InvalidRecord("record has neither a true class nor the novel flag");
    }
}

namespace {

double parse_logit(std::string_view field, std::size_t line, std::size_t column) {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(line, "column " + std::to_string(column) + ": not a number: '" +
                                   std::string(field) + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(line, "column " + std::to_string(column) + ": non-finite logit '" +
                                   std::string(field) + "'");
    }
    return v;
}

void check_id(const std::string& id, const char* what) {
    if (id.find_first_of(",\r\n") != std::string::npos) {
        throw InvalidInput(std::string(what) + " may not contain commas or newlines: " + id);
    }
}

}  // namespace

std::vector<LogitRecord> parse_logit_csv(std::istream& in) {
    std::string text;
    std::size_t line_no = 0;
    if (!std::getline(in, text)) throw ParseError(1, "empty input, expected a header row");
    ++line_no;

    const auto header = split_csv_line(text);
    static const char* fixed[] = {"sample_id", "group_id", "true_class", "is_novel"};
    if (header.size() < 6) {
        throw ParseError(1, "header needs sample_id,group_id,true_class,is_novel and >= 2 logits");
    }
    for (std::size_t c = 0; c < 4; ++c) {
        if (header[c] != fixed[c]) {
            throw ParseError(1, "expected header column '" + std::string(fixed[c]) + "', got '" +
                                    std::string(header[c]) + "'");
        }
    }
    const std::size_t k = header.size() - 4;
    for (std::size_t i = 0; i < k; ++i) {
        if (header[4 + i] != "a_" + std::to_string(i)) {
            throw ParseError(1, "expected header column 'a_" + std::to_string(i) + "'");
        }
    }

    std::vector<LogitRecord> records;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty() || text == "\r") continue;
        const auto fields = split_csv_line(text);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                          " fields, got " + std::to_string(fields.size()));
        }

        std::optional<int> true_class;
        if (!fields[2].empty()) {
            int c = 0;
            const char* end = fields[2].data() + fields[2].size();
            auto [ptr, ec] = std::from_chars(fields[2].data(), end, c);
            if (ec != std::errc{} || ptr != end || c < 0) {
                throw ParseError(line_no, "true_class must be a non-negative integer");
            }
            true_class = c;
        }
        bool novel = false;
        if (fields[3] == "1") {
            novel = true;
        } else if (fields[3] != "0") {
            throw ParseError(line_no, "is_novel must be 0 or 1");
        }
        try {
            validate_annotation(true_class, novel);
        } catch (const InvalidRecord& e) {
            throw ParseError(line_no, e.what());
        }

        std::vector<double> logits(k);
        for (std::size_t i = 0; i < k; ++i) logits[i] = parse_logit(fields[4 + i], line_no, 5 + i);

        records.push_back(LogitRecord{std::string(fields[0]), std::string(fields[1]), true_class,
                                      novel, LogitVector(std::move(logits)), line_no});
    }
    return records;
}

std::vector<LogitRecord> read_logit_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_logit_csv(in);
}

std::string format_logit_csv(const std::vector<LogitRecord>& records) {
    std::size_t k = records.empty() ? 2 : records.front().logits.size();
    std::string out = "sample_id,group_id,true_class,is_novel";
    for (std::size_t i = 0; i < k; ++i) out += ",a_" + std::to_string(i);
    out += '\n';
    for (const auto& r : records) {
        if (r.logits.size() != k) throw InvalidInput("records disagree on class count");
        validate_annotation(r.true_class, r.is_novel);
        check_id(r.sample_id, "sample_id");
        check_id(r.group_id, "group_id");
        out += r.sample_id;
        out += ',';
        out += r.group_id;
        out += ',';
        if (r.true_class) out += std::to_string(*r.true_class);
        out += r.is_novel ? ",1" : ",0";
        for (double a : r.logits.values()) {
            out += ',';
            out += format_double(a);
        }
        out += '\n';
    }
    return out;
}

void write_logit_csv(const std::filesystem::path& path, const std::vector<LogitRecord>& records) {
    write_file_atomic(path, format_logit_csv(records));
}

FoldPlan make_fold_plan(const std::vector<std::string>& group_ids, std::size_t window,
                        std::size_t n_folds, std::size_t cycle) {
    const std::size_t n = group_ids.size();
    if (cycle == 0) cycle = n_folds;
    if (std::set<std::string>(group_ids.begin(), group_ids.end()).size() != n) {
        throw InvalidPlan("group ids must be distinct");
    }
    if (window == 0 || window >= n) {
        throw InvalidPlan("test window " + std::to_string(window) + " must be in [1, " +
                          std::to_string(n) + ") for " + std::to_string(n) + " groups");
    }
    if (n_folds == 0) throw InvalidPlan("need at least one fold");
    if (cycle > n) {
        throw InvalidPlan("rotation cycle " + std::to_string(cycle) + " exceeds " +
                          std::to_string(n) + " groups");
    }
    if (window > cycle) throw InvalidPlan("test window larger than rotation cycle");

    FoldPlan plan;
    plan.n_groups = n;
    plan.test_window = window;
    plan.n_folds = n_folds;
    plan.cycle = cycle;
    for (std::size_t f = 0; f < n_folds; ++f) {
        Fold fold;
        fold.index = f + 1;
        std::vector<bool> is_test(n, false);
        for (std::size_t t = 0; t < window; ++t) {
            const std::size_t pos = (f + t) % cycle;
            is_test[pos] = true;
            fold.test_groups.push_back(group_ids[pos]);
        }
        for (std::size_t g = 0; g < n; ++g) {
            if (!is_test[g]) fold.train_groups.push_back(group_ids[g]);
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

std::vector<std::string> sign_group_ids(const std::vector<LogitRecord>& records) {
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (r.is_novel) continue;
        if (seen.insert(r.group_id).second) ids.push_back(r.group_id);
    }
    return ids;
}

FoldSplit split_fold(const std::vector<LogitRecord>& records, const Fold& fold) {
    const std::set<std::string> test(fold.test_groups.begin(), fold.test_groups.end());
    FoldSplit split;
    for (const auto& r : records) {
        if (r.is_novel || test.count(r.group_id)) {
            split.test.push_back(r);
        } else {
            split.train.push_back(r);
        }
    }
    return split;
}

std::string format_fold_plan_csv(const FoldPlan& plan) {
    std::string out = "fold,role,group_id\n";
    for (const auto& fold : plan.folds) {
        for (const auto& g : fold.test_groups) {
            out += std::to_string(fold.index) + ",test," + g + "\n";
        }
        for (const auto& g : fold.train_groups) {
            out += std::to_string(fold.index) + ",train," + g + "\n";
        }
    }
    return out;
}

}  // namespace nscore
