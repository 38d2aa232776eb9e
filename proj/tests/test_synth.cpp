#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "avprof/synth.hpp"

using namespace avprof;

namespace {

// P(lo <= N <= hi) for N ~ Poisson(lambda), summed term by term.
double poisson_interval(double lambda, int lo, int hi) {
    double term = std::exp(-lambda);
    double total = 0.0;
    for (int k = 0; k <= hi; ++k) {
        if (k >= lo) total += term;
        term *= lambda / static_cast<double>(k + 1);
    }
    return total;
}

double mean_abs_jerk(const Scene& s) {
    double sum = 0.0;
    for (std::size_t t = 1; t < s.length(); ++t) {
        sum += std::abs(s.states[t].accel_mps2 - s.states[t - 1].accel_mps2) / s.sample_interval_s;
    }
    return sum / static_cast<double>(s.length() - 1);
}

}  // namespace

TEST_CASE("synth_scene is deterministic for identical inputs") {
    const auto a = synth_scene(SynthStyle::abrupt(), Label::Autonomous, 120, 0.5, 42);
    const auto b = synth_scene(SynthStyle::abrupt(), Label::Autonomous, 120, 0.5, 42);
    CHECK(a == b);
    CHECK_FALSE(a == synth_scene(SynthStyle::abrupt(), Label::Autonomous, 120, 0.5, 43));
}

TEST_CASE("synth_scene rejects degenerate sizes") {
    CHECK_THROWS_AS(synth_scene(SynthStyle::smooth(), Label::Human, 1, 0.5, 1), ConfigError);
    CHECK_THROWS_AS(synth_scene(SynthStyle::smooth(), Label::Human, 10, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(synth_scene(SynthStyle::smooth(), Label::Human, 10, -1.0, 1), ConfigError);
    SynthStyle bad = SynthStyle::smooth();
    bad.jump_rate = 0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("synthetic series are physical and finite") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        for (const auto& style : {SynthStyle::smooth(), SynthStyle::abrupt()}) {
            const auto s = synth_scene(style, Label::Human, 240, 0.5, seed);
            REQUIRE(s.length() == 240);
            for (std::size_t t = 0; t < s.length(); ++t) {
                const auto& x = s.states[t];
                CHECK(x.range_m >= 0.0);
                CHECK(x.speed_mps >= 0.0);
                CHECK(x.accel_mps2 >= 0.0);
                CHECK(std::abs(x.yaw_rad) <= 3.141592653589793);
                for (double v : x.to_array()) CHECK(std::isfinite(v));
                REQUIRE(s.detections[t].has_value());
                const auto& d = *s.detections[t];
                CHECK(d.h > 0.0);
                CHECK(d.w > 0.0);
                CHECK(d.cx >= 0.0);
                CHECK(d.cx <= 960.0);
                CHECK(d.cy >= 0.0);
                CHECK(d.cy <= 540.0);
            }
        }
    }
}

TEST_CASE("speed integrates the signed acceleration") {
    const auto tr = synth_scene_traced(SynthStyle::abrupt(), Label::Autonomous, 200, 0.5, 5);
    const auto& s = tr.scene;
    for (std::size_t t = 0; t + 1 < s.length(); ++t) {
        const double expected = std::max(0.0, s.states[t].speed_mps + tr.accel_signed[t] * s.sample_interval_s);
        CHECK(s.states[t + 1].speed_mps == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("smooth style acceleration changes stay within four volatilities per step") {
    const auto style = SynthStyle::smooth();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto tr = synth_scene_traced(style, Label::Human, 1000, 0.5, seed);
        for (std::size_t t = 1; t < tr.accel_signed.size(); ++t) {
            worst = std::max(worst, std::abs(tr.accel_signed[t] - tr.accel_signed[t - 1]));
        }
        CHECK(tr.jump_events == 0);
    }
    CHECK(worst <= 4.0 * style.accel_volatility);
}

TEST_CASE("abrupt style jump counts follow the Poisson rate") {
    const auto style = SynthStyle::abrupt();
    const double duration = 60.0;
    const double lambda = style.jump_rate * duration;
    CHECK(lambda == doctest::Approx(12.0));
    const double oracle = poisson_interval(lambda, 4, 24);
    CHECK(oracle > 0.99);

    const int n = 3000;
    int inside = 0;
    double total = 0.0;
    for (int seed = 0; seed < n; ++seed) {
        const auto tr = synth_scene_traced(style, Label::Autonomous, 120, 0.5, static_cast<std::uint64_t>(seed));
        inside += tr.jump_events >= 4 && tr.jump_events <= 24 ? 1 : 0;
        total += tr.jump_events;
    }
    const double frac = static_cast<double>(inside) / n;
    CHECK(frac >= 0.99);
    CHECK(std::abs(frac - oracle) < 3.0 * std::sqrt(oracle * (1.0 - oracle) / n) + 1e-3);
    // The mean count is within 4 standard errors of lambda.
    CHECK(std::abs(total / n - lambda) < 4.0 * std::sqrt(lambda / n));
}

TEST_CASE("abrupt scenes are jerkier than smooth ones on nearly every seed pair") {
    int wins = 0;
    const int pairs = 400;
    for (int i = 0; i < pairs; ++i) {
        const auto a = synth_scene(SynthStyle::abrupt(), Label::Autonomous, 120, 0.5, static_cast<std::uint64_t>(i));
        const auto h = synth_scene(SynthStyle::smooth(), Label::Human, 120, 0.5, static_cast<std::uint64_t>(i + 7919));
        wins += mean_abs_jerk(a) > mean_abs_jerk(h) ? 1 : 0;
    }
    CHECK(static_cast<double>(wins) / pairs >= 0.95);
}

TEST_CASE("synth_dataset is balanced, sorted and seed-derived") {
    const auto ds = synth_dataset(30, 120, 0.5, 7);
    REQUIRE(ds.size() == 60);
    int autonomous = 0;
    for (const auto& s : ds) {
        autonomous += to_int(s.label);
        CHECK(s.metadata.at("source") == "synthetic");
    }
    CHECK(autonomous == 30);
    CHECK(std::is_sorted(ds.begin(), ds.end(), [](const Scene& a, const Scene& b) { return a.id < b.id; }));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = i + 1; j < ds.size(); ++j) CHECK_FALSE(ds[i].states == ds[j].states);
    }
    CHECK(synth_dataset(30, 120, 0.5, 7) == ds);
    CHECK_FALSE(synth_dataset(30, 120, 0.5, 8) == ds);
    CHECK_THROWS_AS(synth_dataset(0, 120, 0.5, 7), ConfigError);
}
