#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "avprof/scene.hpp"

namespace avprof {

/// Fixed-length sub-scene; the unit every learner consumes.
struct WindowSample {
    std::string scene_id;
    std::size_t start_index = 0;
    DatasetKind kind = DatasetKind::S;
    Label label = Label::Human;
    Matrix x;                // W x feature_width(kind)
    std::vector<bool> mask;  // true = state row obfuscated

    std::size_t length() const { return static_cast<std::size_t>(x.rows()); }
    bool degraded() const;
};

/// Converts a duration to a window length in timestamps (5 s at 0.5 s -> 10).
std::size_t window_length_for(double duration_s, double sample_interval_s);

std::vector<WindowSample> slide(const Scene& scene, DatasetKind kind, std::size_t W, std::size_t stride = 1);

/// slide() over many scenes, concatenated in input order.
std::vector<WindowSample> slide_all(const std::vector<const Scene*>& scenes, DatasetKind kind, std::size_t W,
                                    std::size_t stride = 1);

struct SplitPlan {
    std::set<std::string> train_ids;
    std::set<std::string> val_ids;
    std::set<std::string> test_ids;
    std::uint64_t seed = 0;
};

/// Stratified 70/10/20 partition of scenes by id.
SplitPlan split_scenes(const std::vector<Scene>& scenes, std::uint64_t seed);

/// Pointers into `scenes` whose id is in `ids`, in input order.
std::vector<const Scene*> select_scenes(const std::vector<Scene>& scenes, const std::set<std::string>& ids);

/// Number of rows masked per window at drop rate r.
std::size_t masked_row_count(double r, std::size_t W);

/// Obfuscates round(r*W) uniformly chosen state rows per S+D window (set to NaN,
/// mask=true). Detection columns are not touched. Each window draws from its
/// own stream keyed by (seed, scene_id, start_index).
std::vector<WindowSample> degrade(const std::vector<WindowSample>& samples, double r, std::uint64_t seed);

/// Replaces every masked state row with the most recent unmasked one; a leading
/// masked run takes the first unmasked row. The mask is kept.
WindowSample impute_last_known(const WindowSample& sample);

}  // namespace avprof
