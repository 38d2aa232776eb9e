#include "avprof/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace avprof {

namespace {

// Process constants shared by both styles.
constexpr double kAccelPersistence = 0.9;  // AR(1) coefficient of the smooth accel component
constexpr double kJumpDecay = 0.5;         // per-step decay of a jump impulse
constexpr double kNoiseClip = 2.5;         // innovations are clipped at this many sigmas
constexpr double kSpeedPull = 0.1;         // 1/s, pull toward cruise speed
constexpr double kLaneReversion = 0.5;     // 1/s
constexpr double kYawReversion = 1.0;      // 1/s
constexpr double kGapGain = 0.3;           // follower: 1/s^2 on gap error
constexpr double kRelSpeedGain = 0.8;      // follower: 1/s on relative speed
constexpr double kGapNoise = 0.05;         // m per step
constexpr double kMinGap = 2.0;            // m

// Pinhole-style box proxy.
constexpr double kRefHeightPx = 60.0;
constexpr double kRefRange = 20.0;
constexpr double kAspect = 1.25;
constexpr double kFocalPx = 700.0;
constexpr double kYawPxPerRad = 200.0;
constexpr double kImageW = 960.0;
constexpr double kImageH = 540.0;

}  // namespace

SynthStyle SynthStyle::smooth() { return SynthStyle{}; }

SynthStyle SynthStyle::abrupt() {
    SynthStyle s;
    s.name = "abrupt";
    s.jump_rate = 0.2;
    s.jump_magnitude = 3.0;
    return s;
}

void SynthStyle::validate() const {
    if (name != "smooth" && name != "abrupt") throw ConfigError("synth style must be smooth or abrupt");
    for (double v : {accel_volatility, jump_rate, jump_magnitude, lane_wander_sd, yaw_noise_sd}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("synth style magnitudes must be finite and >= 0");
    }
    if (name == "smooth" && jump_rate != 0.0) throw ConfigError("smooth style must have jump_rate = 0");
}

SynthTrace synth_scene_traced(const SynthStyle& style, Label label, std::size_t T, double dt, std::uint64_t seed) {
    style.validate();
    if (T < 2) throw ConfigError("synth_scene: T must be at least 2");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("synth_scene: dt must be positive");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::poisson_distribution<int> jumps(style.jump_rate * dt);
    auto clipped = [&] { return std::clamp(gauss(rng), -kNoiseClip, kNoiseClip); };

    const double v_ref = 8.0 + 6.0 * unif(rng);
    const double gap_ref = 15.0 + 10.0 * unif(rng);
    double v = v_ref;
    double v_ego = v_ref;
    double gap = gap_ref;
    double u = 0.0;
    double jump = 0.0;
    double lane = style.lane_wander_sd * clipped();
    double yaw = style.yaw_noise_sd * clipped();
    const double lane_kick = style.lane_wander_sd * std::sqrt(2.0 * kLaneReversion * dt);
    const double yaw_kick = style.yaw_noise_sd * std::sqrt(2.0 * kYawReversion * dt);

    SynthTrace trace;
    Scene& scene = trace.scene;
    scene.label = label;
    scene.sample_interval_s = dt;
    scene.metadata = {{"source", "synthetic"}, {"style", style.name}};
    scene.states.reserve(T);
    scene.detections.reserve(T);

    for (std::size_t t = 0; t < T; ++t) {
        const double a = u + jump - kSpeedPull * (v - v_ref);
        trace.accel_signed.push_back(a);

        const double range = std::hypot(gap, lane);
        scene.states.push_back({range, v, std::abs(a), lane, wrap_angle(yaw)});

        const double h = kRefHeightPx * kRefRange / range;
        const double cx = kImageW / 2 + kFocalPx * lane / range + kYawPxPerRad * yaw + 2.0 * gauss(rng);
        const double cy = 290.0 + 0.1 * h + 1.5 * gauss(rng);
        scene.detections.push_back(Detection{std::clamp(cx, 0.0, kImageW), std::clamp(cy, 0.0, kImageH), h, kAspect * h});

        // advance one step
        const double v_next = std::max(0.0, v + a * dt);
        const double ego_accel = kGapGain * (gap - gap_ref) + kRelSpeedGain * (v - v_ego);
        gap = std::max(kMinGap, gap + (v - v_ego) * dt + kGapNoise * gauss(rng));
        v_ego = std::max(0.0, v_ego + ego_accel * dt);
        v = v_next;

        u = kAccelPersistence * u + style.accel_volatility * clipped();
        jump *= kJumpDecay;
        if (style.jump_rate > 0.0) {
            const int n = jumps(rng);
            for (int k = 0; k < n; ++k) jump += (unif(rng) < 0.5 ? -1.0 : 1.0) * style.jump_magnitude;
            trace.jump_events += n;
        }
        lane += -kLaneReversion * lane * dt + lane_kick * gauss(rng);
        yaw += -kYawReversion * yaw * dt + yaw_kick * gauss(rng);
    }
    return trace;
}

Scene synth_scene(const SynthStyle& style, Label label, std::size_t T, double dt, std::uint64_t seed) {
    return synth_scene_traced(style, label, T, dt, seed).scene;
}

std::vector<Scene> synth_dataset(std::size_t n_per_class, std::size_t T, double dt, std::uint64_t seed) {
    if (n_per_class < 1) throw ConfigError("synth_dataset: n_per_class must be at least 1");
    std::vector<Scene> scenes;
    scenes.reserve(2 * n_per_class);
    for (Label label : {Label::Human, Label::Autonomous}) {
        const auto style = label == Label::Human ? SynthStyle::smooth() : SynthStyle::abrupt();
        for (std::size_t i = 0; i < n_per_class; ++i) {
            const auto scene_seed = derive_seed(seed, style.name, i);
            Scene s = synth_scene(style, label, T, dt, scene_seed);
            char id[32];
            std::snprintf(id, sizeof id, "synth_%s_%04zu", label == Label::Human ? "h" : "a", i);
            s.id = id;
            scenes.push_back(std::move(s));
        }
    }
    std::sort(scenes.begin(), scenes.end(), [](const Scene& a, const Scene& b) { return a.id < b.id; });
    return scenes;
}

}  // namespace avprof
