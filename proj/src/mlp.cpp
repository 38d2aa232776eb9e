#include "avprof/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "avprof/adam.hpp"

namespace avprof {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using RowVec = Eigen::RowVectorXd;

Matrix logistic(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

MlpNet::MlpNet(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ConfigError("mlp: need at least an input and an output layer");
    if (std::any_of(dims_.begin(), dims_.end(), [](int d) { return d < 1; })) {
        throw ConfigError("mlp: layer widths must be positive");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        offsets_.push_back(offset);
        offset += static_cast<std::size_t>(dims_[l + 1]) * static_cast<std::size_t>(dims_[l] + 1);
    }
    params_.assign(offset, 0.0);
}

void MlpNet::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(dims_[l] + dims_[l + 1]));
        const std::size_t count = static_cast<std::size_t>(dims_[l + 1]) * static_cast<std::size_t>(dims_[l]);
        for (std::size_t k = 0; k < count; ++k) params_[offsets_[l] + k] = limit * u(rng);
    }
}

Matrix MlpNet::forward(const Matrix& inputs) const {
    if (inputs.cols() != dims_.front()) {
        throw DataError("mlp expects " + std::to_string(dims_.front()) + " inputs, got " +
                        std::to_string(inputs.cols()));
    }
    Matrix a = inputs;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        ConstMap W(params_.data() + weight_offset(l), dims_[l + 1], dims_[l]);
        Eigen::Map<const RowVec> b(params_.data() + bias_offset(l), dims_[l + 1]);
        Matrix z = a * W.transpose();
        z.rowwise() += b;
        a = logistic(z);
    }
    return a;
}

double MlpNet::accumulate_gradient(const Matrix& inputs, const Matrix& targets, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw DataError("mlp: gradient buffer has the wrong size");
    if (inputs.rows() != targets.rows() || targets.cols() != dims_.back()) {
        throw DataError("mlp: target shape does not match the output layer");
    }
    const std::size_t L = dims_.size() - 1;
    std::vector<Matrix> acts;
    acts.reserve(L + 1);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < L; ++l) {
        ConstMap W(params_.data() + weight_offset(l), dims_[l + 1], dims_[l]);
        Eigen::Map<const RowVec> b(params_.data() + bias_offset(l), dims_[l + 1]);
        Matrix z = acts.back() * W.transpose();
        z.rowwise() += b;
        acts.push_back(logistic(z));
    }
    const Matrix diff = acts.back() - targets;
    const double count = static_cast<double>(diff.size());
    const double loss = diff.squaredNorm() / count;

    Matrix delta = ((2.0 / count) * diff.array() * acts.back().array() * (1.0 - acts.back().array())).matrix();
    for (std::size_t l = L; l-- > 0;) {
        MutMap(grad.data() + weight_offset(l), dims_[l + 1], dims_[l]).noalias() += delta.transpose() * acts[l];
        Eigen::Map<RowVec>(grad.data() + bias_offset(l), dims_[l + 1]) += delta.colwise().sum();
        if (l == 0) break;
        ConstMap W(params_.data() + weight_offset(l), dims_[l + 1], dims_[l]);
        delta = ((delta * W).array() * acts[l].array() * (1.0 - acts[l].array())).matrix();
    }
    return loss;
}

void MlpHyperParams::validate() const {
    if (history < 1 || horizon < 1) throw ConfigError("autoregressor: history and horizon must be at least 1");
    if (state_dim < 1) throw ConfigError("autoregressor: state_dim must be positive");
    if (std::any_of(hidden_dims.begin(), hidden_dims.end(), [](int d) { return d < 1; })) {
        throw ConfigError("autoregressor: hidden widths must be positive");
    }
    if (!(learning_rate > 0.0) || max_epochs < 1 || patience < 1 || batch_size < 1) {
        throw ConfigError("autoregressor: invalid training settings");
    }
}

std::vector<int> MlpHyperParams::layer_dims() const {
    std::vector<int> dims{history * state_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(horizon * state_dim);
    return dims;
}

Matrix MlpModel::predict_normalized(const Matrix& history) const {
    if (history.rows() != params.history || history.cols() != params.state_dim) {
        throw DataError("autoregressor expects a " + std::to_string(params.history) + "x" +
                        std::to_string(params.state_dim) + " history");
    }
    const Matrix flat = Eigen::Map<const Matrix>(history.data(), 1, history.size());
    const Matrix out = net.forward(flat);
    return Eigen::Map<const Matrix>(out.data(), params.horizon, params.state_dim);
}

Matrix MlpModel::predict(const Matrix& history) const {
    return normalizer.invert(predict_normalized(normalizer.apply(history)));
}

namespace {

// Stacks the unrolled normalized history/target rows of every window.
void build_pairs(const std::vector<const Matrix*>& windows, const Normalizer& norm, const MlpHyperParams& p,
                 Matrix& inputs, Matrix& targets) {
    const auto H = static_cast<Eigen::Index>(p.history);
    const auto F = static_cast<Eigen::Index>(p.horizon);
    const auto k = static_cast<Eigen::Index>(p.state_dim);
    inputs.resize(static_cast<Eigen::Index>(windows.size()), H * k);
    targets.resize(static_cast<Eigen::Index>(windows.size()), F * k);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const Matrix& w = *windows[i];
        if (w.rows() < H + F || w.cols() != k) {
            throw DataError("autoregressor: window of shape " + std::to_string(w.rows()) + "x" +
                            std::to_string(w.cols()) + " cannot supply H+F rows");
        }
        const Matrix hist = norm.apply(w.topRows(H));
        const Matrix fut = norm.apply(w.middleRows(H, F));
        inputs.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const RowVec>(hist.data(), hist.size());
        targets.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const RowVec>(fut.data(), fut.size());
    }
}

}  // namespace

MlpModel mlp_train(const std::vector<const Matrix*>& train, const std::vector<const Matrix*>& val,
                   const MlpHyperParams& params, std::uint64_t seed) {
    params.validate();
    if (train.empty() || val.empty()) throw TrainingError("mlp_train: empty training or validation set");

    MlpModel model;
    model.params = params;
    model.seed = seed;
    std::vector<Matrix> rows;
    rows.reserve(train.size());
    for (const Matrix* w : train) rows.push_back(w->topRows(std::min<Eigen::Index>(w->rows(), params.history + params.horizon)));
    std::vector<const Matrix*> row_ptrs;
    for (const auto& r : rows) row_ptrs.push_back(&r);
    model.normalizer = Normalizer::fit(row_ptrs);

    Matrix train_in, train_out, val_in, val_out;
    build_pairs(train, model.normalizer, params, train_in, train_out);
    build_pairs(val, model.normalizer, params, val_in, val_out);

    MlpNet net(params.layer_dims());
    net.initialize(derive_seed(seed, "init", 0));
    AdamState adam;
    const AdamConfig adam_cfg{params.learning_rate};
    EarlyStopping stopper(params.patience, /*maximize=*/false);
    std::vector<double> best = net.parameters();
    std::vector<double> grad(net.parameter_count());

    const auto n = static_cast<std::size_t>(train_in.rows());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Matrix batch_in, batch_out;
    for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(params.batch_size));
            const auto b = static_cast<Eigen::Index>(end - start);
            batch_in.resize(b, train_in.cols());
            batch_out.resize(b, train_out.cols());
            for (Eigen::Index r = 0; r < b; ++r) {
                batch_in.row(r) = train_in.row(order[start + static_cast<std::size_t>(r)]);
                batch_out.row(r) = train_out.row(order[start + static_cast<std::size_t>(r)]);
            }
            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = net.accumulate_gradient(batch_in, batch_out, grad);
            if (!std::isfinite(loss)) throw TrainingError("mlp_train: loss diverged at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(b);
            adam_step(net.parameters(), grad, adam, adam_cfg);
        }
        epoch_loss /= static_cast<double>(n);
        const double val_mse = (net.forward(val_in) - val_out).squaredNorm() / static_cast<double>(val_out.size());
        model.log.push_back({epoch, epoch_loss, val_mse});
        if (stopper.observe(val_mse)) best = net.parameters();
        if (stopper.should_stop()) break;
    }
    net.parameters() = std::move(best);
    model.net = std::move(net);
    model.best_epoch = stopper.best_epoch();
    return model;
}

}  // namespace avprof
