#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace avprof {

enum class Criterion { Gini, Entropy };

std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view s);

/// 1 - sum p_c^2. Throws DataError on an empty node.
double gini_impurity(std::span<const std::size_t> counts);
/// -sum p_c log2 p_c, in bits.
double shannon_entropy(std::span<const std::size_t> counts);

double impurity(Criterion c, std::size_t negatives, std::size_t positives);

/// parent - (n_l/n) left - (n_r/n) right, from binary class counts.
double impurity_decrease(Criterion c, std::size_t left_neg, std::size_t left_pos, std::size_t right_neg,
                         std::size_t right_pos);

struct Split {
    double threshold = 0.0;  // samples with value <= threshold go left
    double impurity_decrease = 0.0;
};

/// Midpoint between two adjacent distinct sorted values. Falls back to `lo`
/// when rounding would land the midpoint on `hi`.
double split_midpoint(double lo, double hi);

/// Exhaustive search over midpoints of adjacent distinct values, keeping both
/// children at >= min_leaf samples. Ties go to the lowest threshold.
std::optional<Split> best_split(std::span<const double> values, std::span<const int> labels, Criterion criterion,
                                std::size_t min_leaf);

/// Same search over (value, label) pairs already sorted by value.
std::optional<Split> best_split_sorted(std::span<const std::pair<double, int>> sorted, Criterion criterion,
                                       std::size_t min_leaf);

}  // namespace avprof
