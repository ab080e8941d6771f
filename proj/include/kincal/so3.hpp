#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace kincal {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

inline Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d s;
    s << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
        -w.y(), w.x(), 0.0;
    return s;
}

inline Eigen::Matrix3d rot_x(double a) {
    return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

inline Eigen::Matrix3d rot_y(double a) {
    return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

inline Eigen::Matrix3d rot_z(double a) {
    return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

// Rodrigues formula.
inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
    const double angle = w.norm();
    if (angle < 1e-12) {
        const Eigen::Matrix3d k = skew(w);
        return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
    }
    const Eigen::Matrix3d k = skew(w / angle);
    return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

// Geodesic angle of a rotation, in [0, pi]. atan2 form is well conditioned at
// both ends of the range.
inline double rotation_angle(const Eigen::Matrix3d& r) {
    const Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    const double s = 0.5 * v.norm();            // |sin(angle)|
    const double c = 0.5 * (r.trace() - 1.0);   // cos(angle)
    return std::atan2(s, c);
}

// Principal matrix logarithm as a rotation vector, |w| <= pi.
// At (or extremely near) angle pi the skew part vanishes and the axis is
// recovered from the symmetric part; the sign ambiguity there is resolved by
// making the first nonzero axis component positive.
inline Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
    const Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    const double s = 0.5 * v.norm();
    const double c = 0.5 * (r.trace() - 1.0);
    const double angle = std::atan2(s, c);

    if (angle < 1e-9)
        return 0.5 * v;  // w ~ v/2 to third order

    if (s > 1e-6)
        return (angle / v.norm()) * v;

    // angle ~ pi: (R + R^T)/2 = I + (1 - cos)(aa^T - I), exact in the symmetric part
    const double one_minus_c = 1.0 - c;
    int k = 0;
    r.diagonal().maxCoeff(&k);
    Eigen::Vector3d axis;
    axis[k] = std::sqrt(std::max(0.0, (r(k, k) - c) / one_minus_c));
    for (int i = 0; i < 3; ++i) {
        if (i != k)
            axis[i] = 0.5 * (r(i, k) + r(k, i)) / (one_minus_c * axis[k]);
    }
    axis.normalize();
    if (v.norm() > 1e-12) {
        // angle slightly below pi: the skew part still fixes the sign
        if (axis.dot(v) < 0.0)
            axis = -axis;
    } else {
        // exactly pi: both signs represent the rotation; pick the convention
        for (int i = 0; i < 3; ++i) {
            if (std::abs(axis[i]) > 1e-12) {
                if (axis[i] < 0.0)
                    axis = -axis;
                break;
            }
        }
    }
    return angle * axis;
}

// Left Jacobian of SO(3): exp(w + e) = exp(J_l(w) e) exp(w) to first order.
inline Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& w) {
    const double theta = w.norm();
    const Eigen::Matrix3d k = skew(w);
    if (theta < 1e-6)
        return Eigen::Matrix3d::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
    const double t2 = theta * theta;
    return Eigen::Matrix3d::Identity() + ((1.0 - std::cos(theta)) / t2) * k +
           ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

// Wraps a rotation vector onto the principal branch (magnitude <= pi).
inline Eigen::Vector3d wrap_rotation_vector(const Eigen::Vector3d& w) {
    const double angle = w.norm();
    if (angle <= std::numbers::pi)
        return w;
    const double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
    const double principal = wrapped > std::numbers::pi ? wrapped - 2.0 * std::numbers::pi : wrapped;
    return w * (principal / angle);
}

// Frobenius norm of O^T O - I; zero for an exact rotation matrix.
inline double orthonormality_error(const Eigen::Matrix3d& r) {
    return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
}

}  // namespace kincal
