#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "avprof/common.hpp"
#include "avprof/normalizer.hpp"
#include "avprof/training.hpp"

namespace avprof {

/// Intermediate values of one LSTM step, kept for the backward pass.
/// Gate order in the stacked 4H pre-activation: input, forget, candidate, output.
struct LstmCellCache {
    Vector x, h_prev, c_prev;
    Vector i, f, g, o;
    Vector c, tanh_c;
};

struct LstmCellGrads {
    Matrix dW;  // 4H x D
    Matrix dU;  // 4H x H
    Vector db;  // 4H
    Vector dx, dh_prev, dc_prev;
};

/// c' = f*c + i*g, h' = o*tanh(c'). W is 4H x D, U is 4H x H.
std::pair<Vector, Vector> lstm_cell_forward(const Vector& x, const Vector& h, const Vector& c, const Matrix& W,
                                            const Matrix& U, const Vector& b, LstmCellCache* cache = nullptr);

/// Gradients of a loss given dL/dh' and dL/dc'.
LstmCellGrads lstm_cell_backward(const LstmCellCache& cache, const Matrix& W, const Matrix& U, const Vector& dh_next,
                                 const Vector& dc_next);

struct SeqArchitecture {
    int input_dim = 5;
    int hidden_dim = 32;
    int depth = 1;
    int head_dim = 32;  // width of the ReLU dense layer after the last cell
    bool operator==(const SeqArchitecture&) const = default;
};

/// Stacked LSTM classifier: cells over time, last hidden state -> dense ReLU
/// -> dense scalar -> sigmoid. All parameters live in one flat vector.
class SeqNet {
public:
    SeqNet() = default;
    explicit SeqNet(SeqArchitecture arch);

    const SeqArchitecture& architecture() const { return arch_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    /// Glorot-uniform weights, zero biases except +1 on the forget gate.
    void initialize(std::uint64_t seed);

    /// Inference (dropout off): pre-sigmoid output for one T x input_dim sequence.
    double logit(const Matrix& x) const;
    double predict(const Matrix& x) const;

    /// Training pass for one labeled sequence with inverted dropout whose masks
    /// are drawn from `dropout_seed`. Adds scale * dLoss/dParams into `grad` and
    /// returns the binary cross-entropy loss.
    double accumulate_gradient(const Matrix& x, int label, double dropout, std::uint64_t dropout_seed, double scale,
                               std::span<double> grad) const;

    struct LayerOffsets {
        std::size_t W, U, b;
        int in_dim;
    };
    struct HeadOffsets {
        std::size_t W1, b1, W2, b2;
    };
    const std::vector<LayerOffsets>& layer_offsets() const { return layers_; }
    const HeadOffsets& head_offsets() const { return head_; }

private:
    SeqArchitecture arch_;
    std::vector<double> params_;
    std::vector<LayerOffsets> layers_;
    HeadOffsets head_{};
};

double sigmoid(double z);
/// Numerically stable BCE on a logit: softplus(z) - y*z.
double bce_with_logit(double z, int label);

struct SeqHyperParams {
    int depth = 1;
    double dropout = 0.1;
    int hidden_dim = 32;
    int head_dim = 0;  // 0 = same as hidden_dim
    int batch_size = 256;
    double learning_rate = 1e-4;
    int max_epochs = 1000;
    int patience = 5;

    void validate() const;
    bool operator==(const SeqHyperParams&) const = default;
};

/// depth {1, 4, 8} x dropout {0.1, 0.3} x hidden {32, 64, 128}; 18 configurations.
std::vector<SeqHyperParams> default_seq_grid();

struct SequenceExample {
    const Matrix* x = nullptr;
    int label = 0;
};

struct SeqModel {
    SeqNet net;
    Normalizer normalizer;
    SeqHyperParams params;
    std::uint64_t seed = 0;
    int best_epoch = 0;
    std::vector<EpochRecord> log;

    /// Normalizes a raw window and returns P(autonomous).
    double predict_proba(const Matrix& raw) const;
};

/// Minimizes BCE with Adam over shuffled mini-batches; after every epoch the
/// validation auROC is monitored and training stops after `patience` epochs
/// without improvement. Returns the weights of the best validation epoch.
SeqModel seq_train(std::span<const SequenceExample> train, std::span<const SequenceExample> val,
                   const SeqHyperParams& params, std::uint64_t seed, int jobs = 1);

}  // namespace avprof
