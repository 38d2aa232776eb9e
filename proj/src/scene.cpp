#include "avprof/scene.hpp"

#include <cmath>
#include <numbers>

namespace avprof {

Label label_from_int(long long v) {
    if (v == 0) return Label::Human;
    if (v == 1) return Label::Autonomous;
    throw DataError("label must be 0 or 1, got " + std::to_string(v));
}

void Scene::validate() const {
    if (states.size() != detections.size()) {
        throw DataError("scene '" + id + "': state series has " + std::to_string(states.size()) +
                        " rows but detection series has " + std::to_string(detections.size()));
    }
    if (!(sample_interval_s > 0.0) || !std::isfinite(sample_interval_s)) {
        throw DataError("scene '" + id + "': sample interval must be positive");
    }
}

std::string_view to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::S: return "S";
        case DatasetKind::D: return "D";
        case DatasetKind::SD: return "S+D";
    }
    return "?";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
    if (s == "S") return DatasetKind::S;
    if (s == "D") return DatasetKind::D;
    if (s == "S+D" || s == "SD") return DatasetKind::SD;
    throw ConfigError("unknown dataset kind '" + std::string(s) + "' (expected S, D or S+D)");
}

int feature_width(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::S: return kStateWidth;
        case DatasetKind::D: return kDetectionWidth;
        case DatasetKind::SD: return kJointWidth;
    }
    return 0;
}

double wrap_angle(double rad) {
    // remainder() maps into [-pi, pi]; keeps pi itself rather than flipping to -pi.
    return std::remainder(rad, 2.0 * std::numbers::pi);
}

namespace {

void require_finite(const Eigen::Vector3d& v, const char* name) {
    if (!v.allFinite()) throw DataError(std::string("non-finite value in field '") + name + "'");
}

}  // namespace

StateVector build_state_vector(const Eigen::Vector3d& d, const Eigen::Vector3d& d_dot,
                               const Eigen::Vector3d& d_ddot, double lane_offset, double yaw) {
    require_finite(d, "d");
    require_finite(d_dot, "d_dot");
    require_finite(d_ddot, "d_ddot");
    if (!std::isfinite(lane_offset)) throw DataError("non-finite value in field 'l'");
    if (!std::isfinite(yaw)) throw DataError("non-finite value in field 'omega'");
    return StateVector{d.norm(), d_dot.norm(), d_ddot.norm(), lane_offset, wrap_angle(yaw)};
}

std::array<double, kJointWidth> concat_row(const StateVector& s, const Detection& det) {
    return {s.range_m, s.speed_mps, s.accel_mps2, s.lane_offset_m, s.yaw_rad,
            det.cx, det.cy, det.h, det.w};
}

Vector unroll(const Matrix& m) {
    // Row-major storage is already time-major.
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Vector unroll(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Vector(0);
    const std::size_t k = rows.front().size();
    Vector out(static_cast<Eigen::Index>(rows.size() * k));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != k) {
            throw DataError("ragged matrix: row " + std::to_string(t) + " has " +
                            std::to_string(rows[t].size()) + " columns, expected " + std::to_string(k));
        }
        for (std::size_t j = 0; j < k; ++j) out[static_cast<Eigen::Index>(t * k + j)] = rows[t][j];
    }
    return out;
}

Matrix reshape(const Vector& flat, Eigen::Index rows, Eigen::Index cols) {
    if (rows * cols != flat.size()) throw DataError("reshape: size mismatch");
    return Eigen::Map<const Matrix>(flat.data(), rows, cols);
}

Matrix scene_matrix(const Scene& scene, DatasetKind kind) {
    scene.validate();
    const auto T = static_cast<Eigen::Index>(scene.length());
    Matrix m(T, feature_width(kind));
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& s = scene.states[static_cast<std::size_t>(t)];
        const auto& det = scene.detections[static_cast<std::size_t>(t)];
        if (kind != DatasetKind::S && !det) {
            throw DataError("scene '" + scene.id + "': missing detection at row " + std::to_string(t));
        }
        Eigen::Index col = 0;
        if (kind != DatasetKind::D) {
            for (double v : s.to_array()) m(t, col++) = v;
        }
        if (kind != DatasetKind::S) {
            for (double v : det->to_array()) m(t, col++) = v;
        }
    }
    return m;
}

Dataset make_dataset(const std::vector<Scene>& scenes, DatasetKind kind) {
    Dataset ds{kind, {}};
    ds.samples.reserve(scenes.size());
    for (const auto& scene : scenes) {
        ds.samples.push_back({scene_matrix(scene, kind), scene.label});
        if (ds.samples.back().x.rows() != ds.samples.front().x.rows()) {
            throw DataError("dataset: scene '" + scene.id + "' has a different length than the first scene");
        }
    }
    return ds;
}

Dataset slice_dataset(const Dataset& joint, DatasetKind target) {
    if (joint.kind != DatasetKind::SD) throw DataError("slice_dataset: source must be S+D");
    Dataset out{target, {}};
    for (const auto& s : joint.samples) {
        switch (target) {
            case DatasetKind::S: out.samples.push_back({s.x.leftCols(kStateWidth), s.label}); break;
            case DatasetKind::D: out.samples.push_back({s.x.rightCols(kDetectionWidth), s.label}); break;
            case DatasetKind::SD: out.samples.push_back(s); break;
        }
    }
    return out;
}

}  // namespace avprof
