#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gradcheck.hpp"
#include "test_support.hpp"

#include "avprof/metrics.hpp"
#include "avprof/recurrent.hpp"

using namespace avprof;

namespace {

// Class 1 sequences ramp upward, class 0 sequences ramp downward, plus noise.
std::vector<Matrix> ramp_sequences(std::mt19937_64& rng, int n, int T, int D, std::vector<int>& labels) {
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<Matrix> out;
    labels.clear();
    for (int i = 0; i < n; ++i) {
        const int y = i % 2;
        Matrix x(T, D);
        for (int t = 0; t < T; ++t) {
            for (int d = 0; d < D; ++d) x(t, d) = (y ? 1.0 : -1.0) * t / T + noise(rng);
        }
        out.push_back(std::move(x));
        labels.push_back(y);
    }
    return out;
}

std::vector<SequenceExample> examples(const std::vector<Matrix>& xs, const std::vector<int>& ys) {
    std::vector<SequenceExample> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({&xs[i], ys[i]});
    return out;
}

}  // namespace

TEST_CASE("a zero-weight cell halves the memory") {
    const int H = 3, D = 2;
    const Matrix W = Matrix::Zero(4 * H, D);
    const Matrix U = Matrix::Zero(4 * H, H);
    const Vector b = Vector::Zero(4 * H);
    const Vector x = Vector::Constant(D, 0.7);

    auto [h0, c0] = lstm_cell_forward(x, Vector::Zero(H), Vector::Zero(H), W, U, b);
    CHECK(h0.isZero());
    CHECK(c0.isZero());

    const Vector c = (Vector(H) << 1.0, -2.0, 0.5).finished();
    auto [h1, c1] = lstm_cell_forward(x, Vector::Zero(H), c, W, U, b);
    for (int k = 0; k < H; ++k) {
        CHECK(c1[k] == doctest::Approx(0.5 * c[k]));
        CHECK(h1[k] == doctest::Approx(0.5 * std::tanh(0.5 * c[k])));
    }
}

TEST_CASE("cell gradients match central differences") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 20; ++i) {
        const auto r = testing::cell_gradcheck(rng, 1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 5));
        CHECK(r.max_rel_error < 1e-6);
    }
}

TEST_CASE("stacked classifier gradients match central differences") {
    std::mt19937_64 rng(11);
    const std::vector<SeqArchitecture> archs{{5, 4, 1, 4}, {9, 3, 2, 5}, {4, 6, 3, 6}};
    for (const auto& arch : archs) {
        for (double dropout : {0.0, 0.3}) {
            const auto r = testing::seq_gradcheck(rng, arch, 7, dropout, 60);
            CHECK(r.max_rel_error < 1e-5);
        }
    }
}

TEST_CASE("SeqNet layout and initialization") {
    SeqNet net({5, 8, 2, 8});
    const std::size_t lstm1 = 4 * 8 * (5 + 8 + 1);
    const std::size_t lstm2 = 4 * 8 * (8 + 8 + 1);
    const std::size_t head = 8 * 8 + 8 + 8 + 1;
    CHECK(net.parameter_count() == lstm1 + lstm2 + head);
    net.initialize(3);
    const auto& L = net.layer_offsets();
    REQUIRE(L.size() == 2);
    for (int k = 0; k < 4 * 8; ++k) {
        const double bias = net.parameters()[L[0].b + static_cast<std::size_t>(k)];
        CHECK(bias == (k >= 8 && k < 16 ? 1.0 : 0.0));
    }
    const double limit = std::sqrt(6.0 / (5 + 4 * 8));
    for (std::size_t k = L[0].W; k < L[0].W + 4 * 8 * 5; ++k) CHECK(std::abs(net.parameters()[k]) <= limit);

    SeqNet again({5, 8, 2, 8});
    again.initialize(3);
    CHECK(again.parameters() == net.parameters());
}

TEST_CASE("predictions are probabilities and deterministic") {
    std::mt19937_64 rng(12);
    SeqNet net({5, 6, 2, 6});
    net.initialize(4);
    for (int i = 0; i < 50; ++i) {
        const Matrix x = testing::random_matrix(rng, 1 + static_cast<int>(rng() % 20), 5, -3, 3);
        const double p = net.predict(x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        CHECK(net.predict(x) == p);
        CHECK(p == doctest::Approx(sigmoid(net.logit(x))));
    }
}

TEST_CASE("binary cross-entropy on a logit") {
    CHECK(bce_with_logit(0.0, 0) == doctest::Approx(std::numbers::ln2));
    CHECK(bce_with_logit(0.0, 1) == doctest::Approx(std::numbers::ln2));
    for (double z : {-800.0, -3.0, 0.5, 40.0, 800.0}) {
        for (int y : {0, 1}) {
            const double l = bce_with_logit(z, y);
            CHECK(std::isfinite(l));
            CHECK(l >= 0.0);
            if (std::abs(z) < 30) {
                const double p = 1.0 / (1.0 + std::exp(-z));
                CHECK(l == doctest::Approx(-(y * std::log(p) + (1 - y) * std::log(1 - p))).epsilon(1e-9));
            }
        }
    }
    CHECK(sigmoid(-1000.0) >= 0.0);
    CHECK(sigmoid(1000.0) <= 1.0);
}

TEST_CASE("training separates a toy problem and is reproducible") {
    std::mt19937_64 rng(13);
    std::vector<int> ytr, yva;
    const auto xtr = ramp_sequences(rng, 40, 10, 3, ytr);
    const auto xva = ramp_sequences(rng, 20, 10, 3, yva);
    const auto tr = examples(xtr, ytr);
    const auto va = examples(xva, yva);
    SeqHyperParams p;
    p.hidden_dim = 6;
    p.batch_size = 8;
    p.learning_rate = 1e-2;
    p.max_epochs = 40;
    p.patience = 40;
    const auto model = seq_train(tr, va, p, 5);
    REQUIRE(model.log.size() == 40);
    CHECK(model.log.back().train_loss < model.log.front().train_loss);
    std::vector<double> scores;
    for (const auto& x : xva) scores.push_back(model.predict_proba(x));
    CHECK(roc_auc(scores, yva) > 0.95);

    const auto again = seq_train(tr, va, p, 5, 2);
    CHECK(again.net.parameters() == model.net.parameters());
    CHECK(again.best_epoch == model.best_epoch);
}

TEST_CASE("early stopping restores the best epoch") {
    std::mt19937_64 rng(14);
    std::vector<int> ytr, yva;
    const auto xtr = ramp_sequences(rng, 20, 6, 2, ytr);
    const auto xva = ramp_sequences(rng, 10, 6, 2, yva);
    SeqHyperParams p;
    p.hidden_dim = 4;
    p.batch_size = 4;
    p.learning_rate = 5e-3;
    p.max_epochs = 200;
    p.patience = 3;
    const auto model = seq_train(examples(xtr, ytr), examples(xva, yva), p, 6);
    CHECK(static_cast<int>(model.log.size()) <= p.max_epochs);
    const auto& best = model.log[static_cast<std::size_t>(model.best_epoch - 1)];
    for (const auto& rec : model.log) CHECK(rec.val_score <= best.val_score);
    if (static_cast<int>(model.log.size()) < p.max_epochs) {
        CHECK(static_cast<int>(model.log.size()) == model.best_epoch + p.patience);
    }
    std::vector<double> scores;
    for (const auto& x : xva) scores.push_back(model.predict_proba(x));
    CHECK(roc_auc(scores, yva) == doctest::Approx(best.val_score));
}

TEST_CASE("hyperparameter validation") {
    SeqHyperParams p;
    CHECK_NOTHROW(p.validate());
    p.dropout = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.depth = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK(default_seq_grid().size() == 18);

    std::vector<int> y{0, 0};
    std::vector<Matrix> xs{Matrix::Zero(3, 2), Matrix::Ones(3, 2)};
    CHECK_THROWS_AS(seq_train(examples(xs, y), examples(xs, y), SeqHyperParams{}, 1), TrainingError);
}
