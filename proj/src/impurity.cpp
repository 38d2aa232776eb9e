#include "avprof/impurity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "avprof/common.hpp"

namespace avprof {

std::string_view to_string(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

Criterion criterion_from_string(std::string_view s) {
    if (s == "gini") return Criterion::Gini;
    if (s == "entropy") return Criterion::Entropy;
    throw ConfigError("unknown split criterion '" + std::string(s) + "'");
}

namespace {

double total_of(std::span<const std::size_t> counts) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw DataError("impurity of an empty node");
    return static_cast<double>(total);
}

}  // namespace

double gini_impurity(std::span<const std::size_t> counts) {
    const double n = total_of(counts);
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double shannon_entropy(std::span<const std::size_t> counts) {
    const double n = total_of(counts);
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double impurity(Criterion c, std::size_t negatives, std::size_t positives) {
    const std::array<std::size_t, 2> counts{negatives, positives};
    return c == Criterion::Gini ? gini_impurity(counts) : shannon_entropy(counts);
}

double impurity_decrease(Criterion c, std::size_t left_neg, std::size_t left_pos, std::size_t right_neg,
                         std::size_t right_pos) {
    const std::size_t n_left = left_neg + left_pos;
    const std::size_t n_right = right_neg + right_pos;
    const double n = static_cast<double>(n_left + n_right);
    const double parent = impurity(c, left_neg + right_neg, left_pos + right_pos);
    return parent - (static_cast<double>(n_left) / n) * impurity(c, left_neg, left_pos) -
           (static_cast<double>(n_right) / n) * impurity(c, right_neg, right_pos);
}

// Gains closer than this count as tied, so mathematically equal splits resolve
// to the lowest threshold regardless of rounding.
constexpr double kGainTieTolerance = 1e-12;

double split_midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid >= hi ? lo : mid;
}

std::optional<Split> best_split_sorted(std::span<const std::pair<double, int>> sorted, Criterion criterion,
                                       std::size_t min_leaf) {
    const std::size_t n = sorted.size();
    const std::size_t leaf = std::max<std::size_t>(min_leaf, 1);
    if (n < 2 * leaf) return std::nullopt;

    std::size_t total_pos = 0;
    for (const auto& [v, y] : sorted) total_pos += y != 0 ? 1 : 0;
    const std::size_t total_neg = n - total_pos;

    std::optional<Split> best;
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += sorted[i].second != 0 ? 1 : 0;
        const std::size_t n_left = i + 1;
        if (n_left < leaf) continue;
        if (n - n_left < leaf) break;
        if (!(sorted[i].first < sorted[i + 1].first)) continue;

        const std::size_t left_neg = n_left - left_pos;
        const double gain =
            impurity_decrease(criterion, left_neg, left_pos, total_neg - left_neg, total_pos - left_pos);
        if (!best || gain > best->impurity_decrease + kGainTieTolerance) {
            best = Split{split_midpoint(sorted[i].first, sorted[i + 1].first), gain};
        }
    }
    return best;
}

std::optional<Split> best_split(std::span<const double> values, std::span<const int> labels, Criterion criterion,
                                std::size_t min_leaf) {
    if (values.size() != labels.size()) throw DataError("best_split: values and labels differ in length");
    std::vector<std::pair<double, int>> sorted(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sorted[i] = {values[i], labels[i]};
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return best_split_sorted(sorted, criterion, min_leaf);
}

}  // namespace avprof
