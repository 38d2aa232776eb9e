#include "avprof/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace avprof {

std::string_view to_string(MaxFeatures m) { return m == MaxFeatures::Sqrt ? "sqrt" : "log2"; }

MaxFeatures max_features_from_string(std::string_view s) {
    if (s == "sqrt") return MaxFeatures::Sqrt;
    if (s == "log2") return MaxFeatures::Log2;
    throw ConfigError("unknown max_features '" + std::string(s) + "'");
}

std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features) {
    const double n = static_cast<double>(n_features);
    const double k = m == MaxFeatures::Sqrt ? std::sqrt(n) : std::log2(n);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, std::max<std::size_t>(n_features, 1));
}

void RfHyperParams::validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
}

std::vector<RfHyperParams> default_rf_grid() {
    std::vector<RfHyperParams> grid;
    for (int k = 1; k <= 10; ++k) {
        for (int leaf = 1; leaf <= 5; ++leaf) {
            for (auto c : {Criterion::Gini, Criterion::Entropy}) {
                for (auto m : {MaxFeatures::Sqrt, MaxFeatures::Log2}) grid.push_back({100 * k, leaf, c, m, true});
            }
        }
    }
    return grid;
}

double DecisionTree::predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

double RandomForest::predict_proba(std::span<const double> x) const {
    if (x.size() != n_features) {
        throw DataError("forest expects " + std::to_string(n_features) + " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, const RfHyperParams& params, std::uint64_t seed)
        : X_(X), y_(y), params_(params), rng_(seed),
          mtry_(resolve_max_features(params.max_features, static_cast<std::size_t>(X.cols()))),
          features_(static_cast<std::size_t>(X.cols())) {
        std::iota(features_.begin(), features_.end(), 0);
    }

    DecisionTree build() {
        const auto n = static_cast<std::size_t>(X_.rows());
        std::vector<std::size_t> samples(n);
        if (params_.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& s : samples) s = pick(rng_);
        } else {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        }

        DecisionTree tree;
        tree.nodes.emplace_back();
        // (node index, [begin, end) into samples)
        struct Pending {
            int node;
            std::size_t begin;
            std::size_t end;
        };
        std::vector<Pending> stack{{0, 0, n}};
        while (!stack.empty()) {
            const Pending p = stack.back();
            stack.pop_back();
            const std::span<std::size_t> idx(samples.data() + p.begin, p.end - p.begin);

            std::size_t pos = 0;
            for (auto s : idx) pos += y_[s] != 0 ? 1 : 0;
            tree.nodes[static_cast<std::size_t>(p.node)].value = static_cast<double>(pos) / static_cast<double>(idx.size());

            const bool pure = pos == 0 || pos == idx.size();
            if (pure || idx.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) continue;

            const auto chosen = choose_split(idx);
            if (!chosen) continue;

            const auto mid = std::partition(idx.begin(), idx.end(), [&](std::size_t s) {
                return X_(static_cast<Eigen::Index>(s), chosen->first) <= chosen->second;
            });
            const std::size_t n_left = static_cast<std::size_t>(mid - idx.begin());

            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
            node.feature = static_cast<int>(chosen->first);
            node.threshold = chosen->second;
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1, p.begin + n_left, p.end});
            stack.push_back({left, p.begin, p.begin + n_left});
        }
        return tree;
    }

private:
    // (feature, threshold) of the best split over a random feature subset.
    std::optional<std::pair<Eigen::Index, double>> choose_split(std::span<const std::size_t> idx) {
        const std::size_t n_feat = features_.size();
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n_feat - 1);
            std::swap(features_[i], features_[pick(rng_)]);
        }

        std::optional<std::pair<Eigen::Index, double>> best;
        double best_gain = 0.0;
        buffer_.resize(idx.size());
        for (std::size_t i = 0; i < mtry_; ++i) {
            const auto f = static_cast<Eigen::Index>(features_[i]);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                buffer_[k] = {X_(static_cast<Eigen::Index>(idx[k]), f), y_[idx[k]]};
            }
            std::sort(buffer_.begin(), buffer_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (buffer_.front().first == buffer_.back().first) continue;
            const auto split = best_split_sorted(buffer_, params_.criterion, static_cast<std::size_t>(params_.min_leaf));
            if (split && (!best || split->impurity_decrease > best_gain)) {
                best = {{f, split->threshold}};
                best_gain = split->impurity_decrease;
            }
        }
        return best;
    }

    const Matrix& X_;
    std::span<const int> y_;
    const RfHyperParams& params_;
    std::mt19937_64 rng_;
    std::size_t mtry_;
    std::vector<std::size_t> features_;
    std::vector<std::pair<double, int>> buffer_;
};

}  // namespace

RandomForest rf_train(const Matrix& X, std::span<const int> y, const RfHyperParams& params, std::uint64_t seed,
                      int jobs) {
    params.validate();
    if (X.rows() < 2) throw TrainingError("rf_train: need at least 2 samples");
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw DataError("rf_train: X rows and labels differ");
    if (!X.allFinite()) throw DataError("rf_train: non-finite feature values");
    const auto n_pos = std::count_if(y.begin(), y.end(), [](int v) { return v != 0; });
    if (n_pos == 0 || n_pos == static_cast<long>(y.size())) throw TrainingError("rf_train: single-class data");

    RandomForest forest;
    forest.n_features = static_cast<std::size_t>(X.cols());
    forest.params = params;
    forest.seed = seed;
    forest.trees.resize(static_cast<std::size_t>(params.n_trees));
    parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
        forest.trees[t] = TreeBuilder(X, y, params, derive_seed(seed, t)).build();
    });
    return forest;
}

}  // namespace avprof
