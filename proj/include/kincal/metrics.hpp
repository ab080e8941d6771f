#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kincal/dh.hpp"
#include "kincal/rng.hpp"
#include "kincal/so3.hpp"

namespace kincal {

// Joint configurations drawn uniformly over the limits, used to average the
// pose errors of an estimated table against the true one.
struct EvalSet {
    std::vector<JointConfig> configs;

    static EvalSet uniform(const JointConfig& limits, int n, std::uint64_t seed) {
        Rng rng(seed);
        EvalSet set;
        set.configs.reserve(n);
        Eigen::VectorXd u(limits.size());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < limits.size(); ++j)
                u[j] = rng.uniform();
            set.configs.push_back(limits.with_normalized(u));
        }
        return set;
    }
};

// Mean euclidean hand-position error over the evaluation set, in mm.
inline double avg_position_error_mm(const DhTable& est, const DhTable& truth, const EvalSet& evals) {
    if (est.joint_count() != truth.joint_count())
        throw std::invalid_argument("avg_position_error_mm: table dimension mismatch");
    double sum = 0.0;
    for (const JointConfig& theta : evals.configs)
        sum += (forward_kinematics(truth, theta).position - forward_kinematics(est, theta).position).norm();
    return 1000.0 * sum / static_cast<double>(evals.configs.size());
}

// Geodesic distance between two rotations in degrees,
// sqrt(||logm(O^T O_hat)||_F^2 / 2) * 180/pi, evaluated through the rotation angle.
inline double rotation_distance_deg(const Eigen::Matrix3d& o, const Eigen::Matrix3d& o_hat) {
    return rotation_angle(o.transpose() * o_hat) * 180.0 / std::numbers::pi;
}

// Mean geodesic hand-orientation error over the evaluation set, in degrees.
inline double avg_orientation_error_deg(const DhTable& est, const DhTable& truth, const EvalSet& evals) {
    if (est.joint_count() != truth.joint_count())
        throw std::invalid_argument("avg_orientation_error_deg: table dimension mismatch");
    double sum = 0.0;
    for (const JointConfig& theta : evals.configs)
        sum += rotation_distance_deg(forward_kinematics(truth, theta).orientation,
                                     forward_kinematics(est, theta).orientation);
    return sum / static_cast<double>(evals.configs.size());
}

// Sum of l1 joint movements along the visited configurations, in degrees.
inline double accumulated_movement_deg(const std::vector<JointConfig>& history) {
    if (history.empty())
        throw std::invalid_argument("accumulated_movement_deg: empty history");
    double sum = 0.0;
    for (std::size_t k = 1; k < history.size(); ++k)
        sum += (history[k].angles - history[k - 1].angles).lpNorm<1>();
    return sum * 180.0 / std::numbers::pi;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

// Sample mean and stddev (n-1 denominator); stddev is 0 for fewer than two values.
inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd ms;
    if (xs.empty())
        return ms;
    for (double x : xs)
        ms.mean += x;
    ms.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2)
        return ms;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - ms.mean) * (x - ms.mean);
    ms.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return ms;
}

// Number of iterations whose sampling attempt produced no detection.
inline int discarded_count(const std::vector<bool>& detected) {
    int n = 0;
    for (bool d : detected)
        if (!d)
            ++n;
    return n;
}

}  // namespace kincal
