#pragma once

#include <Eigen/Dense>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kincal/so3.hpp"

namespace kincal {

// One joint of a serial chain in classic Denavit-Hartenberg form.
// The joint transform is RotZ(theta + theta_off) * TransZ(d) * TransX(a) * RotX(alpha).
struct DhRow {
    double a = 0.0;          // link length [m]
    double d = 0.0;          // link offset [m]
    double alpha = 0.0;      // link twist [rad]
    double theta_off = 0.0;  // joint angle offset [rad]
};

// The parameter table being estimated: one DhRow per joint plus a fixed,
// known world-to-first-joint transform. Flattening order is row-major
// (a, d, alpha, theta_off per joint), four parameters per joint.
struct DhTable {
    std::vector<DhRow> rows;
    Eigen::Isometry3d base_transform = Eigen::Isometry3d::Identity();

    int joint_count() const { return static_cast<int>(rows.size()); }
    int param_count() const { return 4 * joint_count(); }

    Eigen::VectorXd params() const {
        Eigen::VectorXd x(param_count());
        for (int j = 0; j < joint_count(); ++j) {
            x[4 * j + 0] = rows[j].a;
            x[4 * j + 1] = rows[j].d;
            x[4 * j + 2] = rows[j].alpha;
            x[4 * j + 3] = rows[j].theta_off;
        }
        return x;
    }

    // Same structure (base transform, joint count), parameter values replaced.
    DhTable with_params(const Eigen::VectorXd& x) const {
        if (x.size() != param_count())
            throw std::invalid_argument("DhTable::with_params: parameter vector has wrong size");
        DhTable t = *this;
        for (int j = 0; j < joint_count(); ++j) {
            t.rows[j].a = x[4 * j + 0];
            t.rows[j].d = x[4 * j + 1];
            t.rows[j].alpha = x[4 * j + 2];
            t.rows[j].theta_off = x[4 * j + 3];
        }
        return t;
    }

    // Flat text record, one "a d alpha theta_off" line per joint (m / rad).
    std::string to_text() const;
    static std::vector<DhRow> rows_from_text(const std::string& text);
};

// Joint angles with their limits; convertible to/from the normalized unit cube.
struct JointConfig {
    Eigen::VectorXd angles;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int size() const { return static_cast<int>(angles.size()); }

    Eigen::VectorXd normalized() const {
        return (angles - lower).cwiseQuotient(upper - lower);
    }

    // Same limits, angles taken from unit-cube coordinates.
    JointConfig with_normalized(const Eigen::VectorXd& u) const {
        JointConfig c = *this;
        c.angles = lower + u.cwiseProduct(upper - lower);
        return c;
    }

    bool within_limits(double tol = 0.0) const {
        return (angles.array() >= lower.array() - tol).all() &&
               (angles.array() <= upper.array() + tol).all();
    }
};

// Rigid pose: position plus orthonormal rotation.
struct Pose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();

    Eigen::Isometry3d transform() const {
        Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
        t.linear() = orientation;
        t.translation() = position;
        return t;
    }

    static Pose from_transform(const Eigen::Isometry3d& t) {
        return Pose{t.translation(), t.linear()};
    }
};

// Single-joint DH transform at the given joint angle.
inline Eigen::Isometry3d dh_transform(const DhRow& row, double joint_angle) {
    const double th = joint_angle + row.theta_off;
    const double ct = std::cos(th), st = std::sin(th);
    const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() << ct, -st * ca, st * sa,
                  st, ct * ca, -ct * sa,
                  0.0, sa, ca;
    t.translation() << row.a * ct, row.a * st, row.d;
    return t;
}

// Hand pose h(x, theta): base transform composed with every joint transform in order.
inline Pose forward_kinematics(const DhTable& table, const JointConfig& theta) {
    if (table.joint_count() != theta.size())
        throw std::invalid_argument("forward_kinematics: table and configuration dimension mismatch");
    Eigen::Isometry3d t = table.base_transform;
    for (int j = 0; j < table.joint_count(); ++j)
        t = t * dh_transform(table.rows[j], theta.angles[j]);
    return Pose::from_transform(t);
}

// 6-vector observation coordinates: position, then the principal rotation vector.
inline Vector6d pose_to_obs(const Pose& pose) {
    Vector6d z;
    z.head<3>() = pose.position;
    z.tail<3>() = so3_log(pose.orientation);
    return z;
}

inline Pose obs_to_pose(const Vector6d& z) {
    return Pose{z.head<3>(), so3_exp(z.tail<3>())};
}

// Observation Jacobian H = d(pose_to_obs . forward_kinematics)/dx, 6 x 4n,
// by central finite differences with the given step per parameter.
inline Eigen::MatrixXd observation_jacobian(const DhTable& table, const JointConfig& theta,
                                            double step = 1e-6) {
    const int p = table.param_count();
    const Eigen::VectorXd x = table.params();
    Eigen::MatrixXd h(6, p);
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const Vector6d zp = pose_to_obs(forward_kinematics(table.with_params(xp), theta));
        const Vector6d zm = pose_to_obs(forward_kinematics(table.with_params(xm), theta));
        h.col(j) = (zp - zm) / (2.0 * step);
    }
    return h;
}

inline std::string DhTable::to_text() const {
    std::ostringstream out;
    out.precision(17);
    for (const DhRow& r : rows)
        out << r.a << ' ' << r.d << ' ' << r.alpha << ' ' << r.theta_off << '\n';
    return out.str();
}

inline std::vector<DhRow> DhTable::rows_from_text(const std::string& text) {
    std::vector<DhRow> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        DhRow r;
        if (!(ls >> r.a >> r.d >> r.alpha >> r.theta_off))
            throw std::invalid_argument("DhTable::rows_from_text: malformed row '" + line + "'");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace kincal
