#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kincal/dh.hpp"

namespace kincal {

struct CameraModel {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d optical_axis = Eigen::Vector3d::UnitX();  // unit norm
    double fov_half_angle_deg = 60.0;                         // (0, 90)
};

// Coefficients of the pose-dependent variance model plus the value assumed by
// the constant-noise ablation.
struct NoiseParams {
    double noise_a = 4e-4;          // variance per m^2 of camera distance
    double noise_b = 5e-6;          // variance per deg^2 of view-angle offset from 45
    double constant_sigma2 = 1e-4;  // variance assumed in CN mode
};

// Which covariance the estimator and the selection cost are told about.
enum class NoiseMode { pose_dependent, constant };

struct CameraGeometry {
    double r = 0.0;        // camera-to-marker distance [m]
    double phi_deg = 0.0;  // angle between marker normal and marker-to-camera direction [deg]
};

// The marker's outward normal is its local +z axis.
inline CameraGeometry camera_geometry(const CameraModel& camera, const Pose& marker) {
    const Eigen::Vector3d to_camera = camera.position - marker.position;
    const double r = to_camera.norm();
    if (r < 1e-12)
        throw std::domain_error("camera_geometry: marker coincides with the camera position");
    const Eigen::Vector3d normal = marker.orientation.col(2);
    const double c = std::clamp(normal.dot(to_camera / r), -1.0, 1.0);
    return CameraGeometry{r, std::acos(c) * 180.0 / std::numbers::pi};
}

// sigma^2 = a r^2 + b (phi - 45)^2
inline double predict_variance(double r, double phi_deg, const NoiseParams& params) {
    const double dphi = phi_deg - 45.0;
    return params.noise_a * r * r + params.noise_b * dphi * dphi;
}

constexpr double kVarianceFloor = 1e-8;

// R = sigma^2 I_6, floored so the innovation covariance stays invertible.
inline Matrix6d to_cov(double sigma2) {
    return std::max(sigma2, kVarianceFloor) * Matrix6d::Identity();
}

// Covariance supplied to the estimator and the selection cost for a marker
// seen at distance r and view angle phi.
inline Matrix6d assumed_cov(double r, double phi_deg, const NoiseParams& params, NoiseMode mode) {
    return mode == NoiseMode::pose_dependent ? to_cov(predict_variance(r, phi_deg, params))
                                             : to_cov(params.constant_sigma2);
}

}  // namespace kincal
