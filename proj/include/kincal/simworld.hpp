#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <optional>

#include "kincal/dh.hpp"
#include "kincal/ekf.hpp"
#include "kincal/noise.hpp"
#include "kincal/rng.hpp"

namespace kincal {

// Rigid mount of one fiducial on the hand; the marker's outward normal is the
// +z axis of its frame.
struct MarkerSpec {
    Eigen::Isometry3d offset = Eigen::Isometry3d::Identity();
};

struct VisibilityRule {
    double max_view_angle_deg = 80.0;       // marker undetectable beyond this view angle
    bool require_frontal_workspace = true;  // hand x must be negative (robot x points backwards)
};

// Ground-truth world standing in for the robot, the hand markers and the camera:
// a true DH table, two markers, a virtual camera, the visibility rule and a
// seeded noise stream.
struct GroundTruth {
    DhTable true_table;
    MarkerSpec palm_marker;  // mounted facing the hand's -z
    MarkerSpec back_marker;  // mounted facing the hand's +z
    CameraModel camera;
    NoiseParams noise;
    VisibilityRule visibility;
    std::uint64_t seed = 0;
    Rng rng{0};

    void reseed() { rng = Rng(seed); }
};

// A marker is detectable when it faces the camera closely enough, lies inside
// the field-of-view cone, and the hand sits in the frontal workspace (if required).
inline bool is_visible(const Pose& marker_pose, const CameraModel& camera,
                       const VisibilityRule& rule, const Eigen::Vector3d& hand_position) {
    const Eigen::Vector3d to_marker = marker_pose.position - camera.position;
    const double dist = to_marker.norm();
    if (dist < 1e-12)
        return false;
    const CameraGeometry geom = camera_geometry(camera, marker_pose);
    if (geom.phi_deg > rule.max_view_angle_deg)
        return false;
    const double cone_cos = std::clamp(camera.optical_axis.dot(to_marker / dist), -1.0, 1.0);
    const double cone_deg = std::acos(cone_cos) * 180.0 / std::numbers::pi;
    if (cone_deg > camera.fov_half_angle_deg)
        return false;
    if (rule.require_frontal_workspace && !(hand_position.x() < 0.0))
        return false;
    return true;
}

// One sampling attempt at a joint configuration. Both marker poses are
// computed from the true table; if neither is detectable the attempt is a
// NoDetection (nullopt). Otherwise the marker with the lower predicted
// variance is detected and the hand-pose observation is corrupted with
// zero-mean Gaussian noise of that variance on all six components. The
// returned R is what the estimator is told: the true sigma^2 I in
// pose-dependent mode, constant_sigma2 I in constant mode.
inline std::optional<Measurement> sample_observation(GroundTruth& world, const JointConfig& theta,
                                                     NoiseMode mode = NoiseMode::pose_dependent) {
    const Pose hand = forward_kinematics(world.true_table, theta);

    double best_sigma2 = 0.0;
    bool any_visible = false;
    for (const MarkerSpec* marker : {&world.palm_marker, &world.back_marker}) {
        const Pose pose = Pose::from_transform(hand.transform() * marker->offset);
        if (!is_visible(pose, world.camera, world.visibility, hand.position))
            continue;
        const CameraGeometry geom = camera_geometry(world.camera, pose);
        const double sigma2 = predict_variance(geom.r, geom.phi_deg, world.noise);
        if (!any_visible || sigma2 < best_sigma2) {
            any_visible = true;
            best_sigma2 = sigma2;
        }
    }
    if (!any_visible)
        return std::nullopt;

    const double sigma = std::sqrt(best_sigma2);
    Vector6d z = pose_to_obs(hand);
    for (int i = 0; i < 6; ++i)
        z[i] += sigma * world.rng.normal();
    z.tail<3>() = wrap_rotation_vector(z.tail<3>());

    Measurement meas;
    meas.z = z;
    meas.R = mode == NoiseMode::pose_dependent ? to_cov(best_sigma2) : to_cov(world.noise.constant_sigma2);
    meas.theta = theta;
    return meas;
}

// Initial estimate drawn around the true table: each linear parameter uniform
// within +-width/2 of its true value, each angular parameter likewise.
inline DhTable perturb_initial_estimate(const DhTable& truth, Rng& rng,
                                        double width_linear_m = 0.046,
                                        double width_angular_rad = 54.0 * std::numbers::pi / 180.0) {
    DhTable est = truth;
    for (DhRow& row : est.rows) {
        row.a += rng.uniform(-0.5 * width_linear_m, 0.5 * width_linear_m);
        row.d += rng.uniform(-0.5 * width_linear_m, 0.5 * width_linear_m);
        row.alpha += rng.uniform(-0.5 * width_angular_rad, 0.5 * width_angular_rad);
        row.theta_off += rng.uniform(-0.5 * width_angular_rad, 0.5 * width_angular_rad);
    }
    return est;
}

// Uniform draw over the joint limits.
inline JointConfig uniform_config(const JointConfig& limits, Rng& rng) {
    Eigen::VectorXd u(limits.size());
    for (int j = 0; j < limits.size(); ++j)
        u[j] = rng.uniform();
    return limits.with_normalized(u);
}

}  // namespace kincal
