#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avprof/scene.hpp"

namespace avprof {

/// Driving style of the synthetic target vehicle. `smooth` stands in for a
/// human driver; `abrupt` adds sparse Poisson-timed acceleration jumps.
struct SynthStyle {
    std::string name = "smooth";
    double accel_volatility = 0.15;  // m/s^2 per step
    double jump_rate = 0.0;          // events per second
    double jump_magnitude = 0.0;     // m/s^2
    double lane_wander_sd = 0.15;    // m
    double yaw_noise_sd = 0.02;      // rad

    static SynthStyle smooth();
    static SynthStyle abrupt();
    void validate() const;
};

/// Generator internals exposed for calibration tests.
struct SynthTrace {
    Scene scene;
    std::vector<double> accel_signed;  // longitudinal acceleration command per step
    int jump_events = 0;
};

SynthTrace synth_scene_traced(const SynthStyle& style, Label label, std::size_t T, double dt, std::uint64_t seed);

Scene synth_scene(const SynthStyle& style, Label label, std::size_t T, double dt, std::uint64_t seed);

/// Balanced set: human scenes use the smooth style, autonomous ones the abrupt
/// style. Per-scene seeds derive from the master seed; result sorted by id.
std::vector<Scene> synth_dataset(std::size_t n_per_class, std::size_t T, double dt, std::uint64_t seed);

}  // namespace avprof
