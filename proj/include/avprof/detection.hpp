#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avprof/scene.hpp"

namespace avprof {

/// One detector output with its appearance embedding.
struct CandidateDetection {
    Detection box;
    std::string class_label;
    double confidence = 0.0;
    Vector embedding;
};

/// Reference embeddings of the target (e.g. rear and side views) for one
/// lighting/weather condition.
struct TemplateSet {
    std::vector<Vector> embeddings;
    std::string condition_tag;

    void validate() const;
};

inline constexpr double kDefaultMinConfidence = 0.9;
inline constexpr const char* kDefaultTargetClass = "car";

/// Keeps candidates of `class_name` with confidence >= min_conf, in order.
std::vector<CandidateDetection> filter_candidates(const std::vector<CandidateDetection>& cands,
                                                  double min_conf = kDefaultMinConfidence,
                                                  const std::string& class_name = kDefaultTargetClass);

/// Mean L2 distance from `embedding` to every template embedding.
double avg_template_distance(const Vector& embedding, const TemplateSet& templates);

/// Index (into `cands`) of the candidate that survives the default filter and
/// has the smallest mean template distance. Ties go to the lower index.
std::optional<std::size_t> select_target(const std::vector<CandidateDetection>& cands, const TemplateSet& templates);

struct DetectionSeries {
    std::vector<Detection> boxes;                      // gap-filled, one per frame
    std::vector<std::optional<std::size_t>> selected;  // candidate index per frame, none if filled
};

/// Per-frame selection followed by forward fill (leading gaps backfilled from
/// the first hit). Throws DataError if no frame yields a detection.
DetectionSeries assemble_detection_series(const std::vector<std::vector<CandidateDetection>>& per_frame,
                                          const TemplateSet& templates);

/// Same fill rule applied to a scene's optional detections.
std::vector<Detection> fill_detection_gaps(const std::vector<std::optional<Detection>>& dets);

/// Scene copy with every missing detection filled.
Scene with_filled_detections(const Scene& scene);

/// Candidate file: JSON lines `{frame, candidates: [{box, class, conf, emb}]}`.
/// Frames are returned in ascending frame order.
std::vector<std::vector<CandidateDetection>> read_candidate_file(const std::filesystem::path& path);
TemplateSet read_template_file(const std::filesystem::path& path);

}  // namespace avprof
