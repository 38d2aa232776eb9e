#include "avprof/model_io.hpp"

#include <fstream>
#include <string>

namespace avprof {

using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json log_to_json(const std::vector<EpochRecord>& log) {
    json out = json::array();
    for (const auto& r : log) out.push_back({r.epoch, r.train_loss, r.val_score});
    return out;
}

std::vector<EpochRecord> log_from_json(const json& j) {
    std::vector<EpochRecord> log;
    for (const auto& r : j) log.push_back({r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>()});
    return log;
}

json tree_to_json(const DecisionTree& tree) {
    // Column layout keeps large forests compact.
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array();
    for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

DecisionTree tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n) {
        throw DataError("model: tree columns differ in length");
    }
    DecisionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
        if (feature[i] >= 0 && (left[i] < 0 || right[i] < 0 || static_cast<std::size_t>(left[i]) >= n ||
                                static_cast<std::size_t>(right[i]) >= n)) {
            throw DataError("model: tree node " + std::to_string(i) + " has invalid children");
        }
        tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
    }
    return tree;
}

void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DataError(std::string("model: ") + what + " has " + std::to_string(got) + " values, expected " +
                        std::to_string(want));
    }
}

}  // namespace

std::string_view family_name(const TrainedModel& model) {
    switch (model.index()) {
        case 0: return "rf";
        case 1: return "seq";
        default: return "mlp";
    }
}

json to_json(const Normalizer& n) { return {{"min", vector_to_json(n.min)}, {"max", vector_to_json(n.max)}}; }

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    n.min = vector_from_json(j.at("min"));
    n.max = vector_from_json(j.at("max"));
    check_size(static_cast<std::size_t>(n.max.size()), static_cast<std::size_t>(n.min.size()), "normalizer max");
    return n;
}

json to_json(const RfHyperParams& p) {
    return {{"n_trees", p.n_trees},
            {"min_leaf", p.min_leaf},
            {"criterion", std::string(to_string(p.criterion))},
            {"max_features", std::string(to_string(p.max_features))},
            {"bootstrap", p.bootstrap}};
}

RfHyperParams rf_params_from_json(const json& j) {
    RfHyperParams p;
    p.n_trees = j.value("n_trees", p.n_trees);
    p.min_leaf = j.value("min_leaf", p.min_leaf);
    if (j.contains("criterion")) p.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    if (j.contains("max_features")) p.max_features = max_features_from_string(j.at("max_features").get<std::string>());
    p.bootstrap = j.value("bootstrap", p.bootstrap);
    p.validate();
    return p;
}

json to_json(const SeqHyperParams& p) {
    return {{"depth", p.depth},           {"dropout", p.dropout},
            {"hidden_dim", p.hidden_dim}, {"head_dim", p.head_dim},
            {"batch_size", p.batch_size}, {"learning_rate", p.learning_rate},
            {"max_epochs", p.max_epochs}, {"patience", p.patience}};
}

SeqHyperParams seq_params_from_json(const json& j) {
    SeqHyperParams p;
    p.depth = j.value("depth", p.depth);
    p.dropout = j.value("dropout", p.dropout);
    p.hidden_dim = j.value("hidden_dim", p.hidden_dim);
    p.head_dim = j.value("head_dim", p.head_dim);
    p.batch_size = j.value("batch_size", p.batch_size);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.max_epochs = j.value("max_epochs", p.max_epochs);
    p.patience = j.value("patience", p.patience);
    p.validate();
    return p;
}

json to_json(const MlpHyperParams& p) {
    return {{"history", p.history},           {"horizon", p.horizon},
            {"state_dim", p.state_dim},       {"hidden_dims", p.hidden_dims},
            {"learning_rate", p.learning_rate}, {"max_epochs", p.max_epochs},
            {"patience", p.patience},         {"batch_size", p.batch_size}};
}

MlpHyperParams mlp_params_from_json(const json& j) {
    MlpHyperParams p;
    p.history = j.value("history", p.history);
    p.horizon = j.value("horizon", p.horizon);
    p.state_dim = j.value("state_dim", p.state_dim);
    p.hidden_dims = j.value("hidden_dims", p.hidden_dims);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.max_epochs = j.value("max_epochs", p.max_epochs);
    p.patience = j.value("patience", p.patience);
    p.batch_size = j.value("batch_size", p.batch_size);
    p.validate();
    return p;
}

json model_to_json(const TrainedModel& model) {
    json j{{"format_version", kModelFormatVersion}, {"family", std::string(family_name(model))}};
    if (const auto* rf = std::get_if<RandomForest>(&model)) {
        j["hyperparameters"] = to_json(rf->params);
        j["seed"] = rf->seed;
        j["n_features"] = rf->n_features;
        json trees = json::array();
        for (const auto& t : rf->trees) trees.push_back(tree_to_json(t));
        j["trees"] = std::move(trees);
    } else if (const auto* seq = std::get_if<SeqModel>(&model)) {
        const auto& a = seq->net.architecture();
        j["hyperparameters"] = to_json(seq->params);
        j["seed"] = seq->seed;
        j["architecture"] = {{"input_dim", a.input_dim},
                             {"hidden_dim", a.hidden_dim},
                             {"depth", a.depth},
                             {"head_dim", a.head_dim}};
        j["parameters"] = seq->net.parameters();
        j["normalizer"] = to_json(seq->normalizer);
        j["best_epoch"] = seq->best_epoch;
        j["log"] = log_to_json(seq->log);
    } else {
        const auto& m = std::get<MlpModel>(model);
        j["hyperparameters"] = to_json(m.params);
        j["seed"] = m.seed;
        j["layer_dims"] = m.net.dims();
        j["parameters"] = m.net.parameters();
        j["normalizer"] = to_json(m.normalizer);
        j["best_epoch"] = m.best_epoch;
        j["log"] = log_to_json(m.log);
    }
    return j;
}

TrainedModel model_from_json(const json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw DataError("model: unsupported format version " + std::to_string(version));
        }
        const auto family = j.at("family").get<std::string>();
        if (family == "rf") {
            RandomForest rf;
            rf.params = rf_params_from_json(j.at("hyperparameters"));
            rf.seed = j.at("seed").get<std::uint64_t>();
            rf.n_features = j.at("n_features").get<std::size_t>();
            for (const auto& t : j.at("trees")) rf.trees.push_back(tree_from_json(t));
            return rf;
        }
        if (family == "seq") {
            SeqModel m;
            m.params = seq_params_from_json(j.at("hyperparameters"));
            m.seed = j.at("seed").get<std::uint64_t>();
            const auto& a = j.at("architecture");
            m.net = SeqNet(SeqArchitecture{a.at("input_dim").get<int>(), a.at("hidden_dim").get<int>(),
                                           a.at("depth").get<int>(), a.at("head_dim").get<int>()});
            auto params = j.at("parameters").get<std::vector<double>>();
            check_size(params.size(), m.net.parameter_count(), "sequence parameters");
            m.net.parameters() = std::move(params);
            m.normalizer = normalizer_from_json(j.at("normalizer"));
            m.best_epoch = j.value("best_epoch", 0);
            if (j.contains("log")) m.log = log_from_json(j.at("log"));
            return m;
        }
        if (family == "mlp") {
            MlpModel m;
            m.params = mlp_params_from_json(j.at("hyperparameters"));
            m.seed = j.at("seed").get<std::uint64_t>();
            m.net = MlpNet(j.at("layer_dims").get<std::vector<int>>());
            if (m.net.dims() != m.params.layer_dims()) throw DataError("model: layer dims disagree with hyperparameters");
            auto params = j.at("parameters").get<std::vector<double>>();
            check_size(params.size(), m.net.parameter_count(), "mlp parameters");
            m.net.parameters() = std::move(params);
            m.normalizer = normalizer_from_json(j.at("normalizer"));
            m.best_epoch = j.value("best_epoch", 0);
            if (j.contains("log")) m.log = log_from_json(j.at("log"));
            return m;
        }
        throw DataError("model: unknown family '" + family + "'");
    } catch (const json::exception& e) {
        throw DataError(std::string("model: malformed JSON: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("model: invalid hyperparameters: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path.string());
    out << model_to_json(model).dump() << '\n';
    if (!out) throw IoError("failed writing model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace avprof
