#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_support.hpp"

#include "avprof/model_io.hpp"

using namespace avprof;

namespace {

std::vector<Matrix> noisy_windows(std::mt19937_64& rng, int n, int rows, int cols, std::vector<int>& y) {
    std::vector<Matrix> out;
    y.clear();
    for (int i = 0; i < n; ++i) {
        Matrix m = testing::random_matrix(rng, rows, cols, -1, 1);
        m.array() += i % 2 ? 0.8 : -0.8;
        out.push_back(m);
        y.push_back(i % 2);
    }
    return out;
}

}  // namespace

TEST_CASE("random forest round-trips bit-exactly") {
    std::mt19937_64 rng(50);
    const Matrix X = testing::random_matrix(rng, 40, 6, -1e3, 1e3);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = X(static_cast<Eigen::Index>(i), 0) > 0.1 ? 1 : 0;
    RfHyperParams p;
    p.n_trees = 7;
    p.criterion = Criterion::Entropy;
    const TrainedModel model = rf_train(X, y, p, 77);

    testing::TempDir tmp("model_rf");
    save_model(model, tmp / "rf.json");
    const TrainedModel back = load_model(tmp / "rf.json");
    REQUIRE(std::holds_alternative<RandomForest>(back));
    const auto& a = std::get<RandomForest>(model);
    const auto& b = std::get<RandomForest>(back);
    CHECK(b.params == a.params);
    CHECK(b.seed == a.seed);
    for (int i = 0; i < 200; ++i) {
        const Vector x = testing::random_matrix(rng, 6, 1, -1e3, 1e3);
        const std::span<const double> xs(x.data(), 6);
        CHECK(a.predict_proba(xs) == b.predict_proba(xs));
    }
    CHECK(model_to_json(back) == model_to_json(model));
    CHECK(family_name(back) == "rf");
}

TEST_CASE("sequence model round-trips bit-exactly") {
    std::mt19937_64 rng(51);
    std::vector<int> ytr, yva;
    const auto xtr = noisy_windows(rng, 12, 5, 9, ytr);
    const auto xva = noisy_windows(rng, 6, 5, 9, yva);
    std::vector<SequenceExample> tr, va;
    for (std::size_t i = 0; i < xtr.size(); ++i) tr.push_back({&xtr[i], ytr[i]});
    for (std::size_t i = 0; i < xva.size(); ++i) va.push_back({&xva[i], yva[i]});
    SeqHyperParams p;
    p.depth = 2;
    p.hidden_dim = 4;
    p.max_epochs = 3;
    const TrainedModel model = seq_train(tr, va, p, 5);

    const auto back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
    REQUIRE(std::holds_alternative<SeqModel>(back));
    const auto& a = std::get<SeqModel>(model);
    const auto& b = std::get<SeqModel>(back);
    CHECK(b.net.parameters() == a.net.parameters());
    CHECK(b.net.architecture() == a.net.architecture());
    CHECK(b.params == a.params);
    CHECK(b.best_epoch == a.best_epoch);
    for (const auto& x : xva) CHECK(a.predict_proba(x) == b.predict_proba(x));
}

TEST_CASE("autoregressor round-trips bit-exactly") {
    std::mt19937_64 rng(52);
    std::vector<int> unused;
    const auto windows = noisy_windows(rng, 10, 6, 5, unused);
    std::vector<const Matrix*> ptrs;
    for (const auto& w : windows) ptrs.push_back(&w);
    MlpHyperParams p;
    p.history = 4;
    p.horizon = 2;
    p.max_epochs = 4;
    const TrainedModel model = mlp_train(ptrs, ptrs, p, 3);

    testing::TempDir tmp("model_mlp");
    save_model(model, tmp / "m.json");
    const auto back = load_model(tmp / "m.json");
    REQUIRE(std::holds_alternative<MlpModel>(back));
    const auto& a = std::get<MlpModel>(model);
    const auto& b = std::get<MlpModel>(back);
    CHECK(b.params == a.params);
    CHECK(b.normalizer.min == a.normalizer.min);
    CHECK(b.normalizer.max == a.normalizer.max);
    for (const auto& w : windows) CHECK(a.predict(w.topRows(4)) == b.predict(w.topRows(4)));
    CHECK(family_name(back) == "mlp");
}

TEST_CASE("malformed model files are data errors") {
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"family", "svm"}, {"format_version", 1}}), DataError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"family", "rf"}, {"format_version", 99}}), DataError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json{{"family", "rf"}, {"format_version", 1}}), DataError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::array()), DataError);
    testing::TempDir tmp("model_bad");
    CHECK_THROWS_AS(load_model(tmp / "absent.json"), IoError);
    testing::write_file(tmp / "junk.json", "{not json");
    CHECK_THROWS_AS(load_model(tmp / "junk.json"), DataError);
}

TEST_CASE("hyperparameters round-trip through JSON") {
    RfHyperParams rf;
    rf.n_trees = 300;
    rf.min_leaf = 4;
    rf.max_features = MaxFeatures::Log2;
    CHECK(rf_params_from_json(to_json(rf)) == rf);
    SeqHyperParams seq;
    seq.depth = 8;
    seq.dropout = 0.3;
    CHECK(seq_params_from_json(to_json(seq)) == seq);
    MlpHyperParams mlp;
    mlp.history = 12;
    mlp.horizon = 8;
    CHECK(mlp_params_from_json(to_json(mlp)) == mlp);
}
