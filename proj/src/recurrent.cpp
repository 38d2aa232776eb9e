#include "avprof/recurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "avprof/adam.hpp"
#include "avprof/metrics.hpp"

namespace avprof {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;
using RowVec = Eigen::RowVectorXd;

Eigen::ArrayXd sigmoid_array(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce_with_logit(double z, int label) {
    return std::max(z, 0.0) - z * static_cast<double>(label != 0) + std::log1p(std::exp(-std::abs(z)));
}

std::pair<Vector, Vector> lstm_cell_forward(const Vector& x, const Vector& h, const Vector& c, const Matrix& W,
                                            const Matrix& U, const Vector& b, LstmCellCache* cache) {
    const Eigen::Index H = h.size();
    if (W.rows() != 4 * H || U.rows() != 4 * H || U.cols() != H || b.size() != 4 * H || W.cols() != x.size() ||
        c.size() != H) {
        throw DataError("lstm_cell_forward: dimension mismatch");
    }
    const Vector z = W * x + U * h + b;
    const Vector i = sigmoid_array(z.segment(0, H).array()).matrix();
    const Vector f = sigmoid_array(z.segment(H, H).array()).matrix();
    const Vector g = z.segment(2 * H, H).array().tanh().matrix();
    const Vector o = sigmoid_array(z.segment(3 * H, H).array()).matrix();
    Vector c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
    Vector tanh_c = c_next.array().tanh().matrix();
    Vector h_next = o.cwiseProduct(tanh_c);
    if (cache) *cache = LstmCellCache{x, h, c, i, f, g, o, c_next, tanh_c};
    return {std::move(h_next), std::move(c_next)};
}

LstmCellGrads lstm_cell_backward(const LstmCellCache& k, const Matrix& W, const Matrix& U, const Vector& dh_next,
                                 const Vector& dc_next) {
    const Eigen::Index H = k.h_prev.size();
    const Eigen::ArrayXd one = Eigen::ArrayXd::Ones(H);
    const Eigen::ArrayXd d_o = dh_next.array() * k.tanh_c.array();
    const Eigen::ArrayXd dc =
        dh_next.array() * k.o.array() * (one - k.tanh_c.array().square()) + dc_next.array();

    Vector dz(4 * H);
    dz.segment(0, H) = (dc * k.g.array() * k.i.array() * (one - k.i.array())).matrix();
    dz.segment(H, H) = (dc * k.c_prev.array() * k.f.array() * (one - k.f.array())).matrix();
    dz.segment(2 * H, H) = (dc * k.i.array() * (one - k.g.array().square())).matrix();
    dz.segment(3 * H, H) = (d_o * k.o.array() * (one - k.o.array())).matrix();

    LstmCellGrads g;
    g.dW = dz * k.x.transpose();
    g.dU = dz * k.h_prev.transpose();
    g.db = dz;
    g.dx = W.transpose() * dz;
    g.dh_prev = U.transpose() * dz;
    g.dc_prev = (dc * k.f.array()).matrix();
    return g;
}

SeqNet::SeqNet(SeqArchitecture arch) : arch_(arch) {
    if (arch.input_dim < 1 || arch.hidden_dim < 1 || arch.depth < 1 || arch.head_dim < 1) {
        throw ConfigError("sequence net: all dimensions must be positive");
    }
    const auto H = static_cast<std::size_t>(arch.hidden_dim);
    std::size_t offset = 0;
    for (int l = 0; l < arch.depth; ++l) {
        const int in_dim = l == 0 ? arch.input_dim : arch.hidden_dim;
        LayerOffsets lo{};
        lo.in_dim = in_dim;
        lo.W = offset;
        offset += 4 * H * static_cast<std::size_t>(in_dim);
        lo.U = offset;
        offset += 4 * H * H;
        lo.b = offset;
        offset += 4 * H;
        layers_.push_back(lo);
    }
    const auto Hh = static_cast<std::size_t>(arch.head_dim);
    head_.W1 = offset;
    offset += Hh * H;
    head_.b1 = offset;
    offset += Hh;
    head_.W2 = offset;
    offset += Hh;
    head_.b2 = offset;
    offset += 1;
    params_.assign(offset, 0.0);
}

void SeqNet::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto glorot = [&](std::size_t at, std::size_t count, double fan_in, double fan_out) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t k = 0; k < count; ++k) params_[at + k] = limit * u(rng);
    };
    std::fill(params_.begin(), params_.end(), 0.0);
    const auto H = static_cast<std::size_t>(arch_.hidden_dim);
    for (const auto& lo : layers_) {
        glorot(lo.W, 4 * H * static_cast<std::size_t>(lo.in_dim), lo.in_dim, 4.0 * static_cast<double>(H));
        glorot(lo.U, 4 * H * H, static_cast<double>(H), 4.0 * static_cast<double>(H));
        std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(lo.b + H), H, 1.0);
    }
    const auto Hh = static_cast<std::size_t>(arch_.head_dim);
    glorot(head_.W1, Hh * H, static_cast<double>(H), static_cast<double>(Hh));
    glorot(head_.W2, Hh, static_cast<double>(Hh), 1.0);
}

namespace {

// Per-layer activations of a full sequence pass.
struct LayerTrace {
    Matrix input;  // T x D (after dropout of the layer below)
    Matrix gates;  // T x 4H, activated
    Matrix cells;  // T x H
    Matrix tanh_cells;
    Matrix hidden;  // T x H
};

void run_layer(const Matrix& input, const double* params, const SeqNet::LayerOffsets& lo, int H, LayerTrace& tr) {
    const Eigen::Index T = input.rows();
    ConstMap W(params + lo.W, 4 * H, lo.in_dim);
    ConstMap U(params + lo.U, 4 * H, H);
    Eigen::Map<const RowVec> b(params + lo.b, 4 * H);

    tr.input = input;
    tr.gates = input * W.transpose();
    tr.gates.rowwise() += b;
    tr.cells.resize(T, H);
    tr.tanh_cells.resize(T, H);
    tr.hidden.resize(T, H);

    RowVec h = RowVec::Zero(H);
    RowVec c = RowVec::Zero(H);
    for (Eigen::Index t = 0; t < T; ++t) {
        auto z = tr.gates.row(t);
        if (t > 0) z.noalias() += h * U.transpose();
        z.segment(0, H) = (1.0 / (1.0 + (-z.segment(0, H).array()).exp())).matrix();
        z.segment(H, H) = (1.0 / (1.0 + (-z.segment(H, H).array()).exp())).matrix();
        z.segment(2 * H, H) = z.segment(2 * H, H).array().tanh().matrix();
        z.segment(3 * H, H) = (1.0 / (1.0 + (-z.segment(3 * H, H).array()).exp())).matrix();
        c = z.segment(H, H).cwiseProduct(c) + z.segment(0, H).cwiseProduct(z.segment(2 * H, H));
        tr.cells.row(t) = c;
        tr.tanh_cells.row(t) = c.array().tanh().matrix();
        h = z.segment(3 * H, H).cwiseProduct(tr.tanh_cells.row(t));
        tr.hidden.row(t) = h;
    }
}

// Backprop through one layer given dL/dhidden (T x H); returns dL/dinput.
Matrix backprop_layer(const LayerTrace& tr, const double* params, double* grad, double scale,
                      const SeqNet::LayerOffsets& lo, int H, const Matrix& d_hidden) {
    const Eigen::Index T = tr.input.rows();
    ConstMap W(params + lo.W, 4 * H, lo.in_dim);
    ConstMap U(params + lo.U, 4 * H, H);

    Matrix dz(T, 4 * H);
    RowVec dh_next = RowVec::Zero(H);
    RowVec dc_next = RowVec::Zero(H);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto gate = tr.gates.row(t);
        const Eigen::ArrayXXd i = gate.segment(0, H).array();
        const Eigen::ArrayXXd f = gate.segment(H, H).array();
        const Eigen::ArrayXXd g = gate.segment(2 * H, H).array();
        const Eigen::ArrayXXd o = gate.segment(3 * H, H).array();
        const Eigen::ArrayXXd tc = tr.tanh_cells.row(t).array();

        const Eigen::ArrayXXd dh = (d_hidden.row(t) + dh_next).array();
        const Eigen::ArrayXXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
        const Eigen::ArrayXXd c_prev =
            t > 0 ? Eigen::ArrayXXd(tr.cells.row(t - 1).array()) : Eigen::ArrayXXd::Zero(1, H);

        dz.row(t).segment(0, H) = (dc * g * i * (1.0 - i)).matrix();
        dz.row(t).segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
        dz.row(t).segment(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
        dz.row(t).segment(3 * H, H) = (dh * tc * o * (1.0 - o)).matrix();

        dc_next = (dc * f).matrix();
        dh_next.noalias() = dz.row(t) * U;
    }

    MutMap dW(grad + lo.W, 4 * H, lo.in_dim);
    MutMap dU(grad + lo.U, 4 * H, H);
    Eigen::Map<RowVec> db(grad + lo.b, 4 * H);
    dW.noalias() += scale * (dz.transpose() * tr.input);
    if (T > 1) dU.noalias() += scale * (dz.bottomRows(T - 1).transpose() * tr.hidden.topRows(T - 1));
    db += scale * dz.colwise().sum();
    return dz * W;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(1.0 - rate);
    Matrix m(rows, cols);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = keep(rng) ? scale : 0.0;
    return m;
}

}  // namespace

double SeqNet::logit(const Matrix& x) const {
    if (x.cols() != arch_.input_dim) {
        throw DataError("sequence net expects " + std::to_string(arch_.input_dim) + " features per step, got " +
                        std::to_string(x.cols()));
    }
    const int H = arch_.hidden_dim;
    LayerTrace tr;
    Matrix input = x;
    for (const auto& lo : layers_) {
        run_layer(input, params_.data(), lo, H, tr);
        input = std::move(tr.hidden);
    }
    const RowVec last = input.row(input.rows() - 1);
    ConstMap W1(params_.data() + head_.W1, arch_.head_dim, H);
    Eigen::Map<const RowVec> b1(params_.data() + head_.b1, arch_.head_dim);
    Eigen::Map<const RowVec> W2(params_.data() + head_.W2, arch_.head_dim);
    const RowVec a1 = (last * W1.transpose() + b1).cwiseMax(0.0);
    return a1.dot(W2) + params_[head_.b2];
}

double SeqNet::predict(const Matrix& x) const { return sigmoid(logit(x)); }

double SeqNet::accumulate_gradient(const Matrix& x, int label, double dropout, std::uint64_t dropout_seed,
                                   double scale, std::span<double> grad) const {
    if (grad.size() != params_.size()) throw DataError("sequence net: gradient buffer has the wrong size");
    if (x.cols() != arch_.input_dim) throw DataError("sequence net: input width mismatch");
    const int H = arch_.hidden_dim;
    const Eigen::Index T = x.rows();
    const bool drop = dropout > 0.0;
    std::mt19937_64 rng(dropout_seed);

    std::vector<LayerTrace> traces(layers_.size());
    std::vector<Matrix> masks;  // masks[l] applies to the output of layer l
    Matrix input = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        run_layer(input, params_.data(), layers_[l], H, traces[l]);
        input = traces[l].hidden;
        if (drop && l + 1 < layers_.size()) {
            masks.push_back(dropout_mask(T, H, dropout, rng));
            input = input.cwiseProduct(masks.back());
        }
    }
    RowVec last = input.row(T - 1);
    RowVec head_mask;
    if (drop) {
        head_mask = dropout_mask(1, H, dropout, rng);
        last = last.cwiseProduct(head_mask);
    }

    ConstMap W1(params_.data() + head_.W1, arch_.head_dim, H);
    Eigen::Map<const RowVec> b1(params_.data() + head_.b1, arch_.head_dim);
    Eigen::Map<const RowVec> W2(params_.data() + head_.W2, arch_.head_dim);
    const RowVec pre = last * W1.transpose() + b1;
    const RowVec a1 = pre.cwiseMax(0.0);
    const double z = a1.dot(W2) + params_[head_.b2];
    const double loss = bce_with_logit(z, label);

    // backward
    const double dz = sigmoid(z) - static_cast<double>(label != 0);
    Eigen::Map<RowVec>(grad.data() + head_.W2, arch_.head_dim) += scale * dz * a1;
    grad[head_.b2] += scale * dz;
    const RowVec d_pre = (dz * W2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    MutMap(grad.data() + head_.W1, arch_.head_dim, H).noalias() += scale * (d_pre.transpose() * last);
    Eigen::Map<RowVec>(grad.data() + head_.b1, arch_.head_dim) += scale * d_pre;
    RowVec d_last = d_pre * W1;
    if (drop) d_last = d_last.cwiseProduct(head_mask);

    Matrix d_hidden = Matrix::Zero(T, H);
    d_hidden.row(T - 1) = d_last;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        Matrix d_input = backprop_layer(traces[l], params_.data(), grad.data(), scale, layers_[l], H, d_hidden);
        if (l == 0) break;
        if (drop) d_input = d_input.cwiseProduct(masks[l - 1]);
        d_hidden = std::move(d_input);
    }
    return loss;
}

void SeqHyperParams::validate() const {
    if (depth < 1 || hidden_dim < 1 || head_dim < 0) throw ConfigError("sequence model: invalid dimensions");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("sequence model: dropout must lie in [0, 1)");
    if (batch_size < 1 || max_epochs < 1 || patience < 1) throw ConfigError("sequence model: invalid training settings");
    if (!(learning_rate > 0.0)) throw ConfigError("sequence model: learning rate must be positive");
}

std::vector<SeqHyperParams> default_seq_grid() {
    std::vector<SeqHyperParams> grid;
    for (int depth : {1, 4, 8}) {
        for (double dropout : {0.1, 0.3}) {
            for (int hidden : {32, 64, 128}) {
                SeqHyperParams p;
                p.depth = depth;
                p.dropout = dropout;
                p.hidden_dim = hidden;
                grid.push_back(p);
            }
        }
    }
    return grid;
}

double SeqModel::predict_proba(const Matrix& raw) const { return net.predict(normalizer.apply(raw)); }

SeqModel seq_train(std::span<const SequenceExample> train, std::span<const SequenceExample> val,
                   const SeqHyperParams& params, std::uint64_t seed, int jobs) {
    params.validate();
    if (train.empty() || val.empty()) throw TrainingError("seq_train: empty training or validation set");
    auto has_both = [](std::span<const SequenceExample> s) {
        const auto pos = std::count_if(s.begin(), s.end(), [](const SequenceExample& e) { return e.label != 0; });
        return pos > 0 && pos < static_cast<long>(s.size());
    };
    if (!has_both(train) || !has_both(val)) throw TrainingError("seq_train: both classes required in train and val");

    SeqModel model;
    model.params = params;
    model.seed = seed;
    std::vector<const Matrix*> raw;
    for (const auto& e : train) raw.push_back(e.x);
    model.normalizer = Normalizer::fit(raw);

    std::vector<Matrix> train_x;
    train_x.reserve(train.size());
    for (const auto& e : train) train_x.push_back(model.normalizer.apply(*e.x));
    std::vector<Matrix> val_x;
    val_x.reserve(val.size());
    for (const auto& e : val) val_x.push_back(model.normalizer.apply(*e.x));
    std::vector<int> val_y;
    for (const auto& e : val) val_y.push_back(e.label != 0 ? 1 : 0);

    const int input_dim = static_cast<int>(train_x.front().cols());
    SeqArchitecture arch{input_dim, params.hidden_dim, params.depth, params.head_dim > 0 ? params.head_dim : params.hidden_dim};
    SeqNet net(arch);
    net.initialize(derive_seed(seed, "init", 0));

    AdamState adam;
    const AdamConfig adam_cfg{params.learning_rate};
    EarlyStopping stopper(params.patience, /*maximize=*/true);
    std::vector<double> best_params = net.parameters();

    // Gradient chunks have a fixed size so the reduction order never depends on `jobs`.
    constexpr std::size_t kChunk = 64;
    std::vector<std::size_t> order(train_x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> val_scores(val_x.size());

    for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
            const double scale = 1.0 / static_cast<double>(end - start);
            const std::size_t n_chunks = (end - start + kChunk - 1) / kChunk;
            std::vector<std::vector<double>> chunk_grads(n_chunks, std::vector<double>(net.parameter_count(), 0.0));
            std::vector<double> chunk_loss(n_chunks, 0.0);
            parallel_for(n_chunks, jobs, [&](std::size_t ch) {
                const std::size_t a = start + ch * kChunk;
                const std::size_t b = std::min(end, a + kChunk);
                for (std::size_t k = a; k < b; ++k) {
                    const std::size_t s = order[k];
                    const auto drop_seed = derive_seed(derive_seed(seed, "dropout", static_cast<std::uint64_t>(epoch)), s);
                    chunk_loss[ch] += net.accumulate_gradient(train_x[s], train[s].label, params.dropout, drop_seed,
                                                              scale, chunk_grads[ch]);
                }
            });
            std::vector<double>& grad = chunk_grads.front();
            for (std::size_t ch = 1; ch < n_chunks; ++ch) {
                for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += chunk_grads[ch][p];
            }
            for (double l : chunk_loss) epoch_loss += l;
            if (!std::isfinite(epoch_loss)) {
                throw TrainingError("seq_train: loss diverged at epoch " + std::to_string(epoch));
            }
            adam_step(net.parameters(), grad, adam, adam_cfg);
        }
        epoch_loss /= static_cast<double>(order.size());

        parallel_for(val_x.size(), jobs, [&](std::size_t k) { val_scores[k] = net.predict(val_x[k]); });
        const double val_auc = roc_auc(val_scores, val_y);
        model.log.push_back({epoch, epoch_loss, val_auc});
        if (stopper.observe(val_auc)) best_params = net.parameters();
        if (stopper.should_stop()) break;
    }

    net.parameters() = std::move(best_params);
    model.net = std::move(net);
    model.best_epoch = stopper.best_epoch();
    return model;
}

}  // namespace avprof
