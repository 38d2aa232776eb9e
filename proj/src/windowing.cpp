#include "avprof/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace avprof {

bool WindowSample::degraded() const { return std::find(mask.begin(), mask.end(), true) != mask.end(); }

std::size_t window_length_for(double duration_s, double sample_interval_s) {
    if (!(duration_s > 0.0) || !(sample_interval_s > 0.0)) throw ConfigError("window duration must be positive");
    return static_cast<std::size_t>(std::llround(duration_s / sample_interval_s));
}

std::vector<WindowSample> slide(const Scene& scene, DatasetKind kind, std::size_t W, std::size_t stride) {
    const std::size_t T = scene.length();
    if (W < 1 || W > T) {
        throw DataError("slide: window length " + std::to_string(W) + " does not fit scene '" + scene.id +
                        "' of length " + std::to_string(T));
    }
    if (stride < 1) throw ConfigError("slide: stride must be at least 1");

    const Matrix full = scene_matrix(scene, kind);
    std::vector<WindowSample> out;
    out.reserve((T - W) / stride + 1);
    for (std::size_t start = 0; start + W <= T; start += stride) {
        out.push_back(WindowSample{scene.id, start, kind, scene.label,
                                   full.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(W)),
                                   std::vector<bool>(W, false)});
    }
    return out;
}

std::vector<WindowSample> slide_all(const std::vector<const Scene*>& scenes, DatasetKind kind, std::size_t W,
                                    std::size_t stride) {
    std::vector<WindowSample> out;
    for (const Scene* s : scenes) {
        auto w = slide(*s, kind, W, stride);
        out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    return out;
}

SplitPlan split_scenes(const std::vector<Scene>& scenes, std::uint64_t seed) {
    if (scenes.size() < 10) throw DataError("split_scenes: need at least 10 scenes, got " + std::to_string(scenes.size()));

    std::map<int, std::vector<std::string>> by_class;
    for (const auto& s : scenes) by_class[to_int(s.label)].push_back(s.id);
    if (by_class.size() < 2) throw DataError("split_scenes: both classes must be present");

    SplitPlan plan;
    plan.seed = seed;
    for (auto& [label, ids] : by_class) {
        std::sort(ids.begin(), ids.end());
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
        std::shuffle(ids.begin(), ids.end(), rng);

        const auto n = static_cast<double>(ids.size());
        const auto n_train = static_cast<std::size_t>(std::llround(0.7 * n));
        const auto n_val = std::min(ids.size() - n_train, static_cast<std::size_t>(std::llround(0.1 * n)));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i < n_train) {
                plan.train_ids.insert(ids[i]);
            } else if (i < n_train + n_val) {
                plan.val_ids.insert(ids[i]);
            } else {
                plan.test_ids.insert(ids[i]);
            }
        }
    }
    return plan;
}

std::vector<const Scene*> select_scenes(const std::vector<Scene>& scenes, const std::set<std::string>& ids) {
    std::vector<const Scene*> out;
    for (const auto& s : scenes) {
        if (ids.contains(s.id)) out.push_back(&s);
    }
    return out;
}

std::size_t masked_row_count(double r, std::size_t W) {
    return static_cast<std::size_t>(std::llround(r * static_cast<double>(W)));
}

std::vector<WindowSample> degrade(const std::vector<WindowSample>& samples, double r, std::uint64_t seed) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("degrade: drop rate must lie in (0, 1)");
    std::vector<WindowSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.kind != DatasetKind::SD) throw DataError("degrade: windows must be of kind S+D");
        WindowSample d = s;
        const std::size_t W = d.length();
        const std::size_t n_mask = masked_row_count(r, W);

        std::vector<std::size_t> rows(W);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(seed, s.scene_id, s.start_index));
        // partial Fisher-Yates: the first n_mask entries are a uniform sample
        for (std::size_t i = 0; i < n_mask; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, W - 1);
            std::swap(rows[i], rows[pick(rng)]);
        }
        for (std::size_t i = 0; i < n_mask; ++i) {
            const auto row = static_cast<Eigen::Index>(rows[i]);
            d.mask[rows[i]] = true;
            d.x.row(row).head(kStateWidth).setConstant(std::numeric_limits<double>::quiet_NaN());
        }
        out.push_back(std::move(d));
    }
    return out;
}

WindowSample impute_last_known(const WindowSample& sample) {
    const std::size_t W = sample.length();
    if (sample.mask.size() != W) throw DataError("impute_last_known: mask length does not match window");
    const auto first_known = std::find(sample.mask.begin(), sample.mask.end(), false);
    if (first_known == sample.mask.end()) {
        throw DataError("impute_last_known: every state row of window " + sample.scene_id + "@" +
                        std::to_string(sample.start_index) + " is masked");
    }
    if (sample.kind == DatasetKind::D) return sample;

    WindowSample out = sample;
    auto source = static_cast<Eigen::Index>(first_known - sample.mask.begin());
    for (std::size_t t = 0; t < W; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        if (sample.mask[t]) {
            out.x.row(row).head(kStateWidth) = sample.x.row(source).head(kStateWidth);
        } else {
            source = row;
        }
    }
    return out;
}

}  // namespace avprof
