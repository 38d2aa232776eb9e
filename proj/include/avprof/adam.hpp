#pragma once

#include <span>
#include <vector>

namespace avprof {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment estimates and the step counter t.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
};

/// One bias-corrected Adam update; increments state.t before applying it.
/// Throws TrainingError on a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace avprof
