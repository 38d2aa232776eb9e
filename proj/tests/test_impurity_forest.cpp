#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "avprof/forest.hpp"
#include "avprof/impurity.hpp"

using namespace avprof;

namespace {

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double oracle_impurity(Criterion c, double neg, double pos) {
    const double n = neg + pos;
    const double p[2] = {neg / n, pos / n};
    double out = c == Criterion::Gini ? 1.0 : 0.0;
    for (double q : p) {
        if (c == Criterion::Gini) {
            out -= q * q;
        } else if (q > 0) {
            out -= q * std::log(q) / std::log(2.0);
        }
    }
    return out;
}

struct OracleSplit {
    double threshold;
    double decrease;
};

// Tries every midpoint of adjacent distinct values and counts children directly.
std::optional<OracleSplit> oracle_split(const std::vector<double>& x, const std::vector<int>& y, Criterion c,
                                        std::size_t min_leaf) {
    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    double npos = 0;
    for (int v : y) npos += v;
    const double n = static_cast<double>(x.size());
    const double parent = oracle_impurity(c, n - npos, npos);
    std::optional<OracleSplit> best;
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
        const double thr = split_midpoint(distinct[k], distinct[k + 1]);
        double ln = 0, lp = 0, rn = 0, rp = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] <= thr) {
                (y[i] ? lp : ln) += 1;
            } else {
                (y[i] ? rp : rn) += 1;
            }
        }
        if (ln + lp < static_cast<double>(min_leaf) || rn + rp < static_cast<double>(min_leaf)) continue;
        const double dec = parent - (ln + lp) / n * oracle_impurity(c, ln, lp) - (rn + rp) / n * oracle_impurity(c, rn, rp);
        if (!best || dec > best->decrease + 1e-12) best = OracleSplit{thr, dec};
    }
    return best;
}

Matrix two_blobs(std::mt19937_64& rng, int per_class, int dim, std::vector<int>& y) {
    std::normal_distribution<double> g(0.0, 0.3);
    Matrix X(2 * per_class, dim);
    y.clear();
    for (int i = 0; i < 2 * per_class; ++i) {
        const int label = i % 2;
        for (int j = 0; j < dim; ++j) X(i, j) = (label ? 2.0 : -2.0) + g(rng);
        y.push_back(label);
    }
    return X;
}

}  // namespace

TEST_CASE("impurity fixtures") {
    const std::vector<std::size_t> even{5, 5};
    const std::vector<std::size_t> pure{10, 0};
    const std::vector<std::size_t> skew{1, 3};
    CHECK(gini_impurity(even) == doctest::Approx(0.5));
    CHECK(gini_impurity(pure) == 0.0);
    CHECK(shannon_entropy(even) == doctest::Approx(1.0));
    CHECK(shannon_entropy(pure) == 0.0);
    CHECK(shannon_entropy(skew) == doctest::Approx(oracle_impurity(Criterion::Entropy, 1, 3)).epsilon(1e-12));
    CHECK(shannon_entropy(skew) == doctest::Approx(0.811278).epsilon(1e-6));
    CHECK(gini_impurity(skew) == doctest::Approx(0.375));
    const std::vector<std::size_t> empty{0, 0};
    CHECK_THROWS_AS(gini_impurity(empty), DataError);
    CHECK(criterion_from_string("entropy") == Criterion::Entropy);
    CHECK_THROWS_AS(criterion_from_string("mse"), ConfigError);
}

TEST_CASE("impurity decrease is non-negative and matches the oracle") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t ln = rng() % 10, lp = rng() % 10, rn = rng() % 10, rp = rng() % 10;
        if (ln + lp == 0 || rn + rp == 0) continue;
        for (Criterion c : {Criterion::Gini, Criterion::Entropy}) {
            const double n = static_cast<double>(ln + lp + rn + rp);
            const double expected = oracle_impurity(c, double(ln + rn), double(lp + rp)) -
                                    double(ln + lp) / n * oracle_impurity(c, double(ln), double(lp)) -
                                    double(rn + rp) / n * oracle_impurity(c, double(rn), double(rp));
            const double got = impurity_decrease(c, ln, lp, rn, rp);
            CHECK(got >= -1e-12);
            CHECK(got == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("best_split fixture") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<int> y{0, 0, 1, 1};
    const auto s = best_split(x, y, Criterion::Gini, 1);
    REQUIRE(s.has_value());
    CHECK(s->threshold == 2.5);
    CHECK(s->impurity_decrease == doctest::Approx(0.5));

    const std::vector<double> flat{3, 3, 3};
    const std::vector<int> yf{0, 1, 0};
    CHECK_FALSE(best_split(flat, yf, Criterion::Entropy, 1).has_value());
    CHECK_FALSE(best_split(x, y, Criterion::Gini, 3).has_value());
    CHECK(split_midpoint(1.0, std::nextafter(1.0, 2.0)) == 1.0);
}

TEST_CASE("best_split agrees with exhaustive search") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng() % 19;
        std::vector<double> x(n);
        std::vector<int> y(n);
        const bool coarse = trial % 2 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = coarse ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>(-3, 3)(rng);
            y[i] = static_cast<int>(rng() % 2);
        }
        const std::size_t min_leaf = 1 + rng() % 3;
        const Criterion c = trial % 3 == 0 ? Criterion::Entropy : Criterion::Gini;
        const auto got = best_split(x, y, c, min_leaf);
        const auto want = oracle_split(x, y, c, min_leaf);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        CHECK(got->impurity_decrease == doctest::Approx(want->decrease).epsilon(1e-10));
        CHECK(got->threshold == want->threshold);
    }
}

TEST_CASE("a forest fits a separable toy problem") {
    std::mt19937_64 rng(1);
    std::vector<int> y;
    const Matrix X = two_blobs(rng, 40, 6, y);
    RfHyperParams p;
    p.n_trees = 25;
    const auto rf = rf_train(X, y, p, 3);
    CHECK(rf.trees.size() == 25);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Vector row = X.row(i);
        const double prob = rf.predict_proba(as_span(row));
        CHECK(prob >= 0.0);
        CHECK(prob <= 1.0);
        CHECK((prob > 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("forest training is deterministic and independent of jobs") {
    std::mt19937_64 rng(2);
    std::vector<int> y;
    Matrix X = two_blobs(rng, 30, 5, y);
    X += 1.5 * Matrix::Random(X.rows(), X.cols());
    RfHyperParams p;
    p.n_trees = 12;
    p.criterion = Criterion::Entropy;
    p.max_features = MaxFeatures::Log2;
    const auto a = rf_train(X, y, p, 11, 1);
    const auto b = rf_train(X, y, p, 11, 3);
    const auto c = rf_train(X, y, p, 12, 1);
    bool differs = false;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Vector row = X.row(i);
        CHECK(a.predict_proba(as_span(row)) == b.predict_proba(as_span(row)));
        differs = differs || a.predict_proba(as_span(row)) != c.predict_proba(as_span(row));
    }
    CHECK(differs);
}

TEST_CASE("a single unbagged tree with a large leaf is the best stump") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 8 + 2 * (rng() % 6);
        Matrix X(static_cast<Eigen::Index>(n), 1);
        std::vector<double> x(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = std::uniform_real_distribution<double>(0, 1)(rng);
            X(static_cast<Eigen::Index>(i), 0) = x[i];
            y[i] = static_cast<int>(rng() % 2);
        }
        RfHyperParams p;
        p.n_trees = 1;
        p.bootstrap = false;
        p.min_leaf = static_cast<int>(n / 2);
        const auto rf = rf_train(X, y, p, 5);
        const auto want = oracle_split(x, y, Criterion::Gini, n / 2);
        const auto& nodes = rf.trees.front().nodes;
        if (!want) {
            CHECK(nodes.front().feature == -1);
            continue;
        }
        REQUIRE(nodes.size() == 3);
        CHECK(nodes[0].threshold == want->threshold);
        double left_pos = 0, left_n = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] <= want->threshold) {
                left_n += 1;
                left_pos += y[i];
            }
        }
        CHECK(nodes[static_cast<std::size_t>(nodes[0].left)].value == doctest::Approx(left_pos / left_n));
    }
}

TEST_CASE("forest output does not depend on tree order") {
    std::mt19937_64 rng(6);
    std::vector<int> y;
    Matrix X = two_blobs(rng, 20, 4, y);
    X += 2.0 * Matrix::Random(X.rows(), X.cols());
    RfHyperParams p;
    p.n_trees = 15;
    const auto rf = rf_train(X, y, p, 9);
    auto shuffled = rf;
    std::shuffle(shuffled.trees.begin(), shuffled.trees.end(), rng);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Vector row = X.row(i);
        CHECK(shuffled.predict_proba(as_span(row)) == doctest::Approx(rf.predict_proba(as_span(row))).epsilon(1e-12));
    }
}

TEST_CASE("forest validation") {
    RfHyperParams p;
    p.n_trees = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK(default_rf_grid().size() == 200);
    CHECK(resolve_max_features(MaxFeatures::Sqrt, 450) == 21);
    CHECK(resolve_max_features(MaxFeatures::Log2, 1) == 1);
    CHECK_THROWS_AS(max_features_from_string("all"), ConfigError);

    std::mt19937_64 rng(1);
    std::vector<int> y;
    const Matrix X = two_blobs(rng, 5, 3, y);
    RfHyperParams small;
    small.n_trees = 2;
    const auto rf = rf_train(X, y, small, 1);
    const std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(rf.predict_proba(wrong), DataError);
    CHECK_THROWS_AS(rf_train(X, std::vector<int>{0, 1}, small, 1), DataError);
}
