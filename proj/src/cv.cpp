#include "avprof/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "avprof/common.hpp"

namespace avprof {

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    const auto folds_n = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(folds_n);
    std::size_t next = 0;
    for (auto& [label, members] : by_class) {
        if (members.size() < folds_n) {
            throw DataError("stratified_kfold: class " + std::to_string(label) + " has " +
                            std::to_string(members.size()) + " members, fewer than k=" + std::to_string(k));
        }
        std::mt19937_64 rng(derive_seed(seed, "fold", static_cast<std::uint64_t>(label)));
        std::shuffle(members.begin(), members.end(), rng);
        // Continuing the deal where the previous class stopped keeps total fold sizes within one.
        for (std::size_t idx : members) {
            folds[next].push_back(idx);
            next = (next + 1) % folds_n;
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

GridSearchResult grid_search(std::size_t n_configs, std::span<const int> labels, int k, std::uint64_t seed, int jobs,
                             const FoldEvaluator& evaluate) {
    if (n_configs == 0) throw ConfigError("grid_search: empty grid");
    const auto folds = stratified_kfold(labels, k, seed);
    const std::size_t n_folds = folds.size();

    std::vector<std::vector<std::size_t>> fit_sets(n_folds);
    for (std::size_t f = 0; f < n_folds; ++f) {
        for (std::size_t g = 0; g < n_folds; ++g) {
            if (g != f) fit_sets[f].insert(fit_sets[f].end(), folds[g].begin(), folds[g].end());
        }
        std::sort(fit_sets[f].begin(), fit_sets[f].end());
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    GridSearchResult result;
    result.fold_scores.assign(n_configs, std::vector<double>(n_folds, nan));
    std::vector<std::string> task_errors(n_configs * n_folds);
    parallel_for(n_configs * n_folds, jobs, [&](std::size_t task) {
        const std::size_t c = task / n_folds;
        const std::size_t f = task % n_folds;
        try {
            result.fold_scores[c][f] = evaluate(c, f, fit_sets[f], folds[f]);
        } catch (const std::exception& e) {
            task_errors[task] = "fold " + std::to_string(f) + ": " + e.what();
        }
    });

    result.mean_scores.assign(n_configs, nan);
    result.failures.assign(n_configs, "");
    bool any = false;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_configs; ++c) {
        for (std::size_t f = 0; f < n_folds && result.failures[c].empty(); ++f) {
            result.failures[c] = task_errors[c * n_folds + f];
        }
        if (!result.failures[c].empty()) continue;
        double sum = 0.0;
        for (double s : result.fold_scores[c]) sum += s;
        const double mean = sum / static_cast<double>(n_folds);
        result.mean_scores[c] = mean;
        if (!std::isnan(mean) && (!any || mean > best)) {
            best = mean;
            result.best_index = c;
            any = true;
        }
    }
    if (!any) throw TrainingError("grid_search: every configuration failed; first error: " + result.failures.front());
    return result;
}

}  // namespace avprof
