#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avprof/scene.hpp"

namespace avprof {

/// On-disk layout of one scene: JSON metadata plus a CSV of aligned rows.
struct SceneFileSet {
    std::filesystem::path meta_path;
    std::filesystem::path series_path;

    static SceneFileSet in_directory(const std::filesystem::path& dir) {
        return {dir / "meta.json", dir / "series.csv"};
    }
};

inline constexpr const char* kSeriesHeader =
    "t,range_m,speed_mps,accel_mps2,lane_offset_m,yaw_rad,det_cx,det_cy,det_h,det_w";

Scene parse_scene(const SceneFileSet& files);

/// Writes meta.json and series.csv into `dir` (created if needed). Refuses to
/// replace existing files unless `force` is set.
SceneFileSet write_scene(const Scene& scene, const std::filesystem::path& dir, bool force = false);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Maps the archive's column names and metadata keys onto the canonical ones.
struct ColumnMap {
    std::string meta_file = "meta.json";
    std::string series_file = "series.csv";
    std::string label_key = "label";
    std::string id_key = "id";
    /// canonical name (t, range_m, ..., det_w) -> archive column name
    std::map<std::string, std::string> columns;
    std::size_t expected_length = 120;

    /// Identity mapping over the canonical header.
    static ColumnMap canonical();
    /// Throws ConfigError when a mandatory canonical column is unmapped.
    static ColumnMap from_json_file(const std::filesystem::path& path);
    void validate() const;
};

struct IngestSkip {
    std::string scene;
    std::string reason;
};

struct IngestResult {
    std::vector<Scene> scenes;  // sorted by id
    std::vector<IngestSkip> skipped;
    std::vector<std::string> warnings;
};

/// Walks every subdirectory of `root` as one scene. Scenes shorter than the
/// expected length or otherwise malformed are skipped and recorded; longer ones
/// are truncated.
IngestResult ingest_nexus(const std::filesystem::path& root, const ColumnMap& map, int jobs = 1);

/// Loads a canonical dataset directory (one subdirectory per scene), sorted by id.
std::vector<Scene> load_dataset(const std::filesystem::path& root);

}  // namespace avprof
