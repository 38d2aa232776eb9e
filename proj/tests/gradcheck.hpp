#pragma once

// Central-difference gradient checks shared by the unit and acceptance tests.

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "test_support.hpp"

#include "avprof/mlp.hpp"
#include "avprof/recurrent.hpp"

namespace testing {

using avprof::Matrix;

struct GradCheckResult {
    double max_rel_error = 0.0;
    int coordinates = 0;
};

inline constexpr double kFdStep = 1e-5;

inline double central_difference(const std::function<double()>& f, double& slot) {
    const double saved = slot;
    slot = saved + kFdStep;
    const double up = f();
    slot = saved - kFdStep;
    const double down = f();
    slot = saved;
    return (up - down) / (2.0 * kFdStep);
}

inline void record(GradCheckResult& r, double analytic, double numeric) {
    r.max_rel_error = std::max(r.max_rel_error, rel_error(analytic, numeric));
    ++r.coordinates;
}

/// One random LSTM cell; the loss is a random linear functional of (h', c').
inline GradCheckResult cell_gradcheck(std::mt19937_64& rng, int D = 4, int H = 3) {
    Matrix W = random_matrix(rng, 4 * H, D);
    Matrix U = random_matrix(rng, 4 * H, H);
    avprof::Vector b = random_matrix(rng, 4 * H, 1);
    avprof::Vector x = random_matrix(rng, D, 1, -2, 2);
    avprof::Vector h = random_matrix(rng, H, 1);
    avprof::Vector c = random_matrix(rng, H, 1, -2, 2);
    const avprof::Vector wh = random_matrix(rng, H, 1);
    const avprof::Vector wc = random_matrix(rng, H, 1);

    avprof::LstmCellCache cache;
    avprof::lstm_cell_forward(x, h, c, W, U, b, &cache);
    const auto g = avprof::lstm_cell_backward(cache, W, U, wh, wc);
    const auto loss = [&] {
        const auto [h2, c2] = avprof::lstm_cell_forward(x, h, c, W, U, b);
        return wh.dot(h2) + wc.dot(c2);
    };

    GradCheckResult r;
    for (Eigen::Index k = 0; k < W.size(); ++k) record(r, g.dW.data()[k], central_difference(loss, W.data()[k]));
    for (Eigen::Index k = 0; k < U.size(); ++k) record(r, g.dU.data()[k], central_difference(loss, U.data()[k]));
    for (Eigen::Index k = 0; k < b.size(); ++k) record(r, g.db[k], central_difference(loss, b[k]));
    for (Eigen::Index k = 0; k < x.size(); ++k) record(r, g.dx[k], central_difference(loss, x[k]));
    for (Eigen::Index k = 0; k < h.size(); ++k) record(r, g.dh_prev[k], central_difference(loss, h[k]));
    for (Eigen::Index k = 0; k < c.size(); ++k) record(r, g.dc_prev[k], central_difference(loss, c[k]));
    return r;
}

/// Samples `coords` parameters of a random stacked classifier, dropout included
/// (masks are fixed by the dropout seed, so the loss is a smooth function), and
/// checks every parameter of the dense head after the last cell.
inline GradCheckResult seq_gradcheck(std::mt19937_64& rng, const avprof::SeqArchitecture& arch, int T, double dropout,
                                     int coords) {
    avprof::SeqNet net(arch);
    net.initialize(rng());
    // Spread the weights beyond their initial scale so every gate is exercised.
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (auto& p : net.parameters()) p += jitter(rng);
    const Matrix x = random_matrix(rng, T, arch.input_dim, 0, 1);
    const int label = static_cast<int>(rng() % 2);
    const std::uint64_t drop_seed = rng();

    std::vector<double> grad(net.parameter_count(), 0.0);
    net.accumulate_gradient(x, label, dropout, drop_seed, 1.0, grad);
    std::vector<double> scratch(net.parameter_count());
    const auto loss = [&] { return net.accumulate_gradient(x, label, dropout, drop_seed, 0.0, scratch); };

    GradCheckResult r;
    std::uniform_int_distribution<std::size_t> pick(0, net.parameter_count() - 1);
    for (int i = 0; i < coords; ++i) {
        const std::size_t k = pick(rng);
        record(r, grad[k], central_difference(loss, net.parameters()[k]));
    }
    for (std::size_t k = net.head_offsets().W1; k < net.parameter_count(); ++k) {
        record(r, grad[k], central_difference(loss, net.parameters()[k]));
    }
    return r;
}

inline GradCheckResult mlp_gradcheck(std::mt19937_64& rng, const std::vector<int>& dims, int rows, int coords) {
    avprof::MlpNet net(dims);
    net.initialize(rng());
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (auto& p : net.parameters()) p += jitter(rng);
    const Matrix in = random_matrix(rng, rows, dims.front(), 0, 1);
    const Matrix target = random_matrix(rng, rows, dims.back(), 0, 1);

    std::vector<double> grad(net.parameter_count(), 0.0);
    net.accumulate_gradient(in, target, grad);
    std::vector<double> scratch(net.parameter_count());
    const auto loss = [&] { return net.accumulate_gradient(in, target, scratch); };

    GradCheckResult r;
    std::uniform_int_distribution<std::size_t> pick(0, net.parameter_count() - 1);
    for (int i = 0; i < coords; ++i) {
        const std::size_t k = pick(rng);
        record(r, grad[k], central_difference(loss, net.parameters()[k]));
    }
    return r;
}

}  // namespace testing
