#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nscore/scores.hpp"

namespace nscore {

struct LogitRecord {
    std::string sample_id;
    std::string group_id;
    std::optional<int> true_class;
    bool is_novel = false;
    LogitVector logits;
    /// 1-based line in the source CSV; 0 when not read from a file.
    std::size_t line = 0;
};

/// Throws InvalidRecord unless exactly one of true_class / is_novel is set.
void validate_annotation(const std::optional<int>& true_class, bool is_novel);

/// Header: sample_id,group_id,true_class,is_novel,a_0,...,a_{K-1}
std::vector<LogitRecord> parse_logit_csv(std::istream& in);
std::vector<LogitRecord> read_logit_csv(const std::filesystem::path& path);

std::string format_logit_csv(const std::vector<LogitRecord>& records);
void write_logit_csv(const std::filesystem::path& path, const std::vector<LogitRecord>& records);

struct Fold {
    std::size_t index = 0;  // 1-based
    std::vector<std::string> test_groups;
    std::vector<std::string> train_groups;
};

struct FoldPlan {
    std::size_t n_groups = 0;
    std::size_t test_window = 3;
    std::size_t n_folds = 10;
    std::size_t cycle = 10;
    std::vector<Fold> folds;
};

/// Fold f (1-based) tests the groups at positions f-1 .. f+window-2 modulo cycle.
/// cycle == 0 means "use n_folds".
FoldPlan make_fold_plan(const std::vector<std::string>& group_ids, std::size_t window = 3,
                        std::size_t n_folds = 10, std::size_t cycle = 0);

/// Distinct group ids of the non-novel records, in order of first appearance.
std::vector<std::string> sign_group_ids(const std::vector<LogitRecord>& records);

struct FoldSplit {
    std::vector<LogitRecord> train;
    std::vector<LogitRecord> test;
};

/// Novel records always land on the test side.
FoldSplit split_fold(const std::vector<LogitRecord>& records, const Fold& fold);

/// Columns: fold,role,group_id
std::string format_fold_plan_csv(const FoldPlan& plan);

}  // namespace nscore
