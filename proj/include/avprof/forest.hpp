#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "avprof/common.hpp"
#include "avprof/impurity.hpp"

namespace avprof {

enum class MaxFeatures { Sqrt, Log2 };

std::string_view to_string(MaxFeatures m);
MaxFeatures max_features_from_string(std::string_view s);

/// Features examined per node for n input features (at least one).
std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features);

struct RfHyperParams {
    int n_trees = 100;
    int min_leaf = 1;
    Criterion criterion = Criterion::Gini;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    bool bootstrap = true;

    void validate() const;
    bool operator==(const RfHyperParams&) const = default;
};

/// Search grid: trees {100..1000 step 100}, min leaf {1..5}, both criteria,
/// sqrt/log2 feature subsets. 200 configurations.
std::vector<RfHyperParams> default_rf_grid();

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // positive-class frequency of the training samples in the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;
};

struct RandomForest {
    std::size_t n_features = 0;
    RfHyperParams params;
    std::uint64_t seed = 0;
    std::vector<DecisionTree> trees;

    /// Mean over trees of the leaf positive-class frequency.
    double predict_proba(std::span<const double> x) const;
};

/// X holds one flattened sample per row; y is 0/1 per row. Each tree grows on
/// its own bootstrap resample with an RNG stream derived from (seed, tree index).
RandomForest rf_train(const Matrix& X, std::span<const int> y, const RfHyperParams& params, std::uint64_t seed,
                      int jobs = 1);

}  // namespace avprof
