#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "avprof/common.hpp"
#include "avprof/normalizer.hpp"
#include "avprof/training.hpp"

namespace avprof {

/// Fully connected net with a sigmoid after every layer, the output included.
/// Layer l holds W_l (dims[l+1] x dims[l]) followed by b_l in one flat vector.
class MlpNet {
public:
    MlpNet() = default;
    explicit MlpNet(std::vector<int> dims);

    const std::vector<int>& dims() const { return dims_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed);

    /// One input per row; returns one output per row.
    Matrix forward(const Matrix& inputs) const;

    /// Adds d(mean squared error)/dParams over the whole batch into `grad` and
    /// returns that mean squared error (averaged over rows and outputs).
    double accumulate_gradient(const Matrix& inputs, const Matrix& targets, std::span<double> grad) const;

    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_[layer] + static_cast<std::size_t>(dims_[layer + 1]) * static_cast<std::size_t>(dims_[layer]);
    }

private:
    std::vector<int> dims_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

struct MlpHyperParams {
    int history = 1;  // H input rows
    int horizon = 1;  // F predicted rows
    int state_dim = 5;
    std::vector<int> hidden_dims{32, 16};
    double learning_rate = 1e-4;
    int max_epochs = 10000;
    int patience = 10;
    int batch_size = 32;

    void validate() const;
    std::vector<int> layer_dims() const;
    bool operator==(const MlpHyperParams&) const = default;
};

struct MlpModel {
    MlpNet net;
    Normalizer normalizer;  // per state feature, fitted on training windows
    MlpHyperParams params;
    std::uint64_t seed = 0;
    int best_epoch = 0;
    std::vector<EpochRecord> log;

    /// Normalized H x state_dim history -> normalized F x state_dim forecast.
    Matrix predict_normalized(const Matrix& history) const;
    /// Raw history -> raw forecast (inverse-normalized).
    Matrix predict(const Matrix& history) const;
};

/// Each window supplies rows [0, H) as input and [H, H+F) as target; extra rows
/// are ignored. Minimizes normalized MSE with Adam; early stopping on the
/// validation MSE keeps the best epoch's weights.
MlpModel mlp_train(const std::vector<const Matrix*>& train, const std::vector<const Matrix*>& val,
                   const MlpHyperParams& params, std::uint64_t seed);

inline Matrix mlp_predict(const MlpModel& model, const Matrix& history) { return model.predict(history); }

}  // namespace avprof
