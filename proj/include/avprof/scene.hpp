#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avprof/common.hpp"

namespace avprof {

inline constexpr int kStateWidth = 5;
inline constexpr int kDetectionWidth = 4;
inline constexpr int kJointWidth = kStateWidth + kDetectionWidth;

/// Target-vehicle state observed by the follower at one timestamp.
/// The first three entries are L2 norms of the relative position, velocity
/// and acceleration vectors; yaw is wrapped into [-pi, pi].
struct StateVector {
    double range_m = 0.0;
    double speed_mps = 0.0;
    double accel_mps2 = 0.0;
    double lane_offset_m = 0.0;
    double yaw_rad = 0.0;

    std::array<double, kStateWidth> to_array() const {
        return {range_m, speed_mps, accel_mps2, lane_offset_m, yaw_rad};
    }
    bool operator==(const StateVector&) const = default;
};

/// 2D bounding box in image pixels, origin at the upper-left pixel.
struct Detection {
    double cx = 0.0;
    double cy = 0.0;
    double h = 1.0;
    double w = 1.0;

    std::array<double, kDetectionWidth> to_array() const { return {cx, cy, h, w}; }
    bool operator==(const Detection&) const = default;
};

enum class Label : int { Human = 0, Autonomous = 1 };

constexpr int to_int(Label l) { return static_cast<int>(l); }
Label label_from_int(long long v);

/// One labeled recording: aligned state and detection series.
struct Scene {
    std::string id;
    Label label = Label::Human;
    std::map<std::string, std::string> metadata;
    std::vector<StateVector> states;
    std::vector<std::optional<Detection>> detections;
    double sample_interval_s = 0.5;

    std::size_t length() const { return states.size(); }
    /// Throws DataError if the series lengths differ or the interval is not positive.
    void validate() const;
    bool operator==(const Scene&) const = default;
};

enum class DatasetKind { S, D, SD };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view s);
int feature_width(DatasetKind kind);

/// Builds a state vector from raw relative kinematics. Throws DataError naming
/// the first non-finite field.
StateVector build_state_vector(const Eigen::Vector3d& d, const Eigen::Vector3d& d_dot,
                               const Eigen::Vector3d& d_ddot, double lane_offset, double yaw);

double wrap_angle(double rad);

/// [range, speed, accel, lane_offset, yaw, cx, cy, h, w]
std::array<double, kJointWidth> concat_row(const StateVector& s, const Detection& det);

/// Time-major flattening: element (t, j) lands at t * cols + j.
Vector unroll(const Matrix& m);
Vector unroll(const std::vector<std::vector<double>>& rows);
Matrix reshape(const Vector& flat, Eigen::Index rows, Eigen::Index cols);

/// Full-length T x k feature matrix of a scene. D and SD kinds require every
/// detection to be present (fill gaps first).
Matrix scene_matrix(const Scene& scene, DatasetKind kind);

struct LabeledMatrix {
    Matrix x;
    Label label = Label::Human;
};

/// A dataset variant over whole scenes; all matrices share one shape.
struct Dataset {
    DatasetKind kind = DatasetKind::S;
    std::vector<LabeledMatrix> samples;
};

Dataset make_dataset(const std::vector<Scene>& scenes, DatasetKind kind);

/// Column slice of a joint dataset: S takes the first 5 columns, D the last 4.
Dataset slice_dataset(const Dataset& joint, DatasetKind target);

}  // namespace avprof
