#include "avprof/detection.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace avprof {

using nlohmann::json;

void TemplateSet::validate() const {
    if (embeddings.empty()) throw DataError("template set is empty");
    for (const auto& e : embeddings) {
        if (e.size() != embeddings.front().size()) throw DataError("template embeddings differ in dimension");
    }
}

std::vector<CandidateDetection> filter_candidates(const std::vector<CandidateDetection>& cands, double min_conf,
                                                  const std::string& class_name) {
    std::vector<CandidateDetection> out;
    std::copy_if(cands.begin(), cands.end(), std::back_inserter(out), [&](const CandidateDetection& c) {
        return c.class_label == class_name && c.confidence >= min_conf;
    });
    return out;
}

double avg_template_distance(const Vector& embedding, const TemplateSet& templates) {
    templates.validate();
    double sum = 0.0;
    for (const auto& t : templates.embeddings) {
        if (t.size() != embedding.size()) {
            throw DataError("embedding dimension " + std::to_string(embedding.size()) +
                            " does not match template dimension " + std::to_string(t.size()));
        }
        sum += (embedding - t).norm();
    }
    return sum / static_cast<double>(templates.embeddings.size());
}

std::optional<std::size_t> select_target(const std::vector<CandidateDetection>& cands, const TemplateSet& templates) {
    std::optional<std::size_t> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& c = cands[i];
        if (c.class_label != kDefaultTargetClass || c.confidence < kDefaultMinConfidence) continue;
        const double d = avg_template_distance(c.embedding, templates);
        if (!best || d < best_distance) {
            best = i;
            best_distance = d;
        }
    }
    return best;
}

namespace {

template <class Opt, class Get>
std::vector<Detection> fill_gaps(const std::vector<Opt>& items, Get get) {
    const auto first = std::find_if(items.begin(), items.end(), [&](const Opt& o) { return get(o).has_value(); });
    if (first == items.end()) throw DataError("no detection in scene");
    Detection last = *get(*first);
    std::vector<Detection> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        if (const auto& d = get(item)) last = *d;
        out.push_back(last);
    }
    return out;
}

}  // namespace

DetectionSeries assemble_detection_series(const std::vector<std::vector<CandidateDetection>>& per_frame,
                                          const TemplateSet& templates) {
    DetectionSeries series;
    std::vector<std::optional<Detection>> picked;
    picked.reserve(per_frame.size());
    for (const auto& frame : per_frame) {
        const auto idx = select_target(frame, templates);
        series.selected.push_back(idx);
        picked.push_back(idx ? std::optional<Detection>(frame[*idx].box) : std::nullopt);
    }
    series.boxes = fill_detection_gaps(picked);
    return series;
}

std::vector<Detection> fill_detection_gaps(const std::vector<std::optional<Detection>>& dets) {
    return fill_gaps(dets, [](const std::optional<Detection>& d) -> const std::optional<Detection>& { return d; });
}

Scene with_filled_detections(const Scene& scene) {
    Scene out = scene;
    if (std::all_of(scene.detections.begin(), scene.detections.end(), [](const auto& d) { return d.has_value(); })) {
        return out;
    }
    const auto filled = fill_detection_gaps(scene.detections);
    for (std::size_t t = 0; t < filled.size(); ++t) out.detections[t] = filled[t];
    return out;
}

namespace {

Vector to_vector(const json& arr) {
    const auto v = arr.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

CandidateDetection candidate_from_json(const json& j) {
    const auto box = j.at("box").get<std::vector<double>>();
    if (box.size() != 4) throw DataError("candidate box must have 4 entries [cx, cy, h, w]");
    CandidateDetection c;
    c.box = Detection{box[0], box[1], box[2], box[3]};
    c.class_label = j.at("class").get<std::string>();
    c.confidence = j.at("conf").get<double>();
    c.embedding = to_vector(j.at("emb"));
    if (c.confidence < 0.0 || c.confidence > 1.0) throw DataError("candidate confidence outside [0, 1]");
    return c;
}

}  // namespace

std::vector<std::vector<CandidateDetection>> read_candidate_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::map<long long, std::vector<CandidateDetection>> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const auto frame = j.at("frame").get<long long>();
            if (frames.contains(frame)) throw DataError("duplicate frame " + std::to_string(frame));
            auto& list = frames[frame];
            for (const auto& c : j.at("candidates")) list.push_back(candidate_from_json(c));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::vector<std::vector<CandidateDetection>> out;
    out.reserve(frames.size());
    for (auto& [frame, list] : frames) out.push_back(std::move(list));
    return out;
}

TemplateSet read_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    TemplateSet set;
    try {
        const json j = json::parse(in);
        set.condition_tag = j.value("condition", std::string{});
        for (const auto& e : j.at("embeddings")) set.embeddings.push_back(to_vector(e));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    set.validate();
    return set;
}

}  // namespace avprof
