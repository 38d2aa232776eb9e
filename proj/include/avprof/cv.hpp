#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace avprof {

/// Partitions sample indices [0, labels.size()) into k folds. Each class is
/// shuffled with its own seeded stream and dealt round-robin, so per-class
/// counts differ by at most one between folds. Fold contents are ascending.
/// Throws ConfigError if k < 2 and DataError if a class has fewer than k members.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

/// Validation auROC of one configuration trained on `fit` and scored on `held_out`
/// (indices into the label array given to grid_search).
using FoldEvaluator = std::function<double(std::size_t config, std::size_t fold, const std::vector<std::size_t>& fit,
                                           const std::vector<std::size_t>& held_out)>;

struct GridSearchResult {
    std::size_t best_index = 0;
    std::vector<std::vector<double>> fold_scores;  // [config][fold]
    std::vector<double> mean_scores;               // NaN for failed configurations
    std::vector<std::string> failures;             // empty when the configuration succeeded
};

/// k-fold cross-validated search: every (config, fold) pair is evaluated, the
/// configuration with the highest mean score wins and ties go to the earliest.
/// A configuration fails if any of its folds throws; if all fail, TrainingError.
GridSearchResult grid_search(std::size_t n_configs, std::span<const int> labels, int k, std::uint64_t seed, int jobs,
                             const FoldEvaluator& evaluate);

}  // namespace avprof
