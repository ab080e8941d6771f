#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "kincal/dh.hpp"
#include "kincal/rng.hpp"

using namespace kincal;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Isometry3d translate(const Vector3d& t) {
    Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
    m.translation() = t;
    return m;
}

Eigen::Isometry3d rotate(const Matrix3d& r) {
    Eigen::Isometry3d m = Eigen::Isometry3d::Identity();
    m.linear() = r;
    return m;
}

// Independent oracle: the four elementary transforms multiplied explicitly.
Eigen::Isometry3d dh_oracle(const DhRow& row, double angle) {
    return rotate(rot_z(angle + row.theta_off)) * translate(Vector3d(0, 0, row.d)) *
           translate(Vector3d(row.a, 0, 0)) * rotate(rot_x(row.alpha));
}

JointConfig config_for(const VectorXd& angles) {
    JointConfig c;
    c.angles = angles;
    c.lower = VectorXd::Constant(angles.size(), -kPi);
    c.upper = VectorXd::Constant(angles.size(), kPi);
    return c;
}

DhTable planar_two_link() {
    DhTable t;
    t.rows = {DhRow{1.0, 0, 0, 0}, DhRow{1.0, 0, 0, 0}};
    return t;
}

DhTable random_table(Rng& rng, int joints) {
    DhTable t;
    for (int j = 0; j < joints; ++j)
        t.rows.push_back(DhRow{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                               rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)});
    return t;
}

// Rejects configurations whose total rotation sits near the log-map branch
// cut, where finite differences of the rotation vector are meaningless.
bool away_from_branch_cut(const DhTable& t, const JointConfig& c) {
    return rotation_angle(forward_kinematics(t, c).orientation) < 2.8;
}

MatrixXd forward_difference_jacobian(const DhTable& table, const JointConfig& theta, double step) {
    const VectorXd x = table.params();
    MatrixXd h(6, x.size());
    const Vector6d z0 = pose_to_obs(forward_kinematics(table, theta));
    for (int j = 0; j < x.size(); ++j) {
        VectorXd xp = x;
        xp[j] += step;
        h.col(j) = (pose_to_obs(forward_kinematics(table.with_params(xp), theta)) - z0) / step;
    }
    return h;
}

double relative_deviation(const MatrixXd& a, const MatrixXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-9);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("dh_transform: unit link at zero angle translates along x") {
    const auto t = dh_transform(DhRow{1, 0, 0, 0}, 0.0);
    REQUIRE(t.translation().isApprox(Vector3d(1, 0, 0), 1e-15));
    REQUIRE(t.linear().isApprox(Matrix3d::Identity(), 1e-15));
}

TEST_CASE("dh_transform: pure offset translates along z") {
    const auto t = dh_transform(DhRow{0, 1, 0, 0}, 0.0);
    REQUIRE(t.translation().isApprox(Vector3d(0, 0, 1), 1e-15));
}

TEST_CASE("dh_transform: unit link at pi/2 matches the elementary-transform oracle") {
    const DhRow row{1, 0, 0, 0};
    const auto t = dh_transform(row, kPi / 2);
    const auto oracle = dh_oracle(row, kPi / 2);
    REQUIRE(t.translation().isApprox(Vector3d(0, 1, 0), 1e-12));
    REQUIRE(t.linear().isApprox(rot_z(kPi / 2), 1e-12));
    REQUIRE((t.matrix() - oracle.matrix()).norm() < 1e-12);
}

TEST_CASE("dh_transform agrees with the oracle on random rows") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const DhRow row{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-kPi, kPi),
                        rng.uniform(-kPi, kPi)};
        const double angle = rng.uniform(-kPi, kPi);
        REQUIRE((dh_transform(row, angle).matrix() - dh_oracle(row, angle).matrix()).norm() < 1e-12);
    }
}

TEST_CASE("forward kinematics: straight planar chain") {
    const auto pose = forward_kinematics(planar_two_link(), config_for(Eigen::Vector2d(0, 0)));
    REQUIRE(pose.position.isApprox(Vector3d(2, 0, 0), 1e-15));
}

TEST_CASE("forward kinematics: bent planar chain matches composition oracle") {
    const DhTable t = planar_two_link();
    const JointConfig c = config_for(Eigen::Vector2d(kPi / 2, 0));
    const auto pose = forward_kinematics(t, c);
    const Eigen::Isometry3d oracle = dh_oracle(t.rows[0], kPi / 2) * dh_oracle(t.rows[1], 0);
    REQUIRE(pose.position.isApprox(Vector3d(0, 2, 0), 1e-12));
    REQUIRE(pose.position.isApprox(oracle.translation(), 1e-12));
    REQUIRE(pose.orientation.isApprox(oracle.linear(), 1e-12));
}

TEST_CASE("forward kinematics rejects dimension mismatch") {
    REQUIRE_THROWS_AS(forward_kinematics(planar_two_link(), config_for(Eigen::Vector3d(0, 0, 0))),
                      std::invalid_argument);
}

TEST_CASE("orientation is orthonormal over 1000 random configurations") {
    Rng rng(22);
    const DhTable t = random_table(rng, 7);
    for (int i = 0; i < 1000; ++i) {
        VectorXd angles(7);
        for (int j = 0; j < 7; ++j)
            angles[j] = rng.uniform(-kPi, kPi);
        const auto pose = forward_kinematics(t, config_for(angles));
        REQUIRE(orthonormality_error(pose.orientation) <= 1e-9);
        REQUIRE(pose.orientation.determinant() == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("pose_to_obs: identity and planar rotation") {
    REQUIRE(pose_to_obs(Pose{}).norm() == 0.0);
    Pose p;
    p.orientation = rot_z(kPi / 2);
    const Vector6d z = pose_to_obs(p);
    REQUIRE(z.tail<3>().isApprox(Vector3d(0, 0, kPi / 2), 1e-12));
}

TEST_CASE("pose_to_obs round trips through the exponential within 1e-9") {
    Rng rng(23);
    const DhTable t = random_table(rng, 5);
    for (int i = 0; i < 300; ++i) {
        VectorXd angles(5);
        for (int j = 0; j < 5; ++j)
            angles[j] = rng.uniform(-kPi, kPi);
        const Pose pose = forward_kinematics(t, config_for(angles));
        const Vector6d z = pose_to_obs(pose);
        REQUIRE(z.tail<3>().norm() <= kPi + 1e-12);
        REQUIRE((so3_exp(z.tail<3>()) - pose.orientation).norm() < 1e-9);
    }
}

TEST_CASE("jacobian: link-length column of a single-link table") {
    DhTable t;
    t.rows = {DhRow{0.7, 0, 0, 0}};
    for (double angle : {0.0, 0.4, -1.1}) {
        const MatrixXd h = observation_jacobian(t, config_for(VectorXd::Constant(1, angle)));
        // d position / d a = (cos th, sin th, 0), hand-differentiated
        REQUIRE(h(0, 0) == Catch::Approx(std::cos(angle)).margin(1e-7));
        REQUIRE(h(1, 0) == Catch::Approx(std::sin(angle)).margin(1e-7));
        REQUIRE(h(2, 0) == Catch::Approx(0.0).margin(1e-7));
    }
}

TEST_CASE("jacobian: wrist-roll theta_off leaves position untouched") {
    DhTable t;
    t.rows = {DhRow{0.3, 0.2, 0.5, 0.1}, DhRow{0.0, 0.15, 0.0, 0.0}};
    const MatrixXd h = observation_jacobian(t, config_for(Eigen::Vector2d(0.3, -0.8)));
    const int col = 4 * 1 + 3;  // theta_off of the last joint
    REQUIRE(h.col(col).head<3>().norm() < 1e-6);
}

TEST_CASE("jacobian agrees with a forward-difference oracle") {
    Rng rng(24);
    int tested = 0;
    while (tested < 50) {
        const DhTable t = random_table(rng, 4);
        VectorXd angles(4);
        for (int j = 0; j < 4; ++j)
            angles[j] = rng.uniform(-kPi / 2, kPi / 2);
        const JointConfig c = config_for(angles);
        if (!away_from_branch_cut(t, c))
            continue;
        ++tested;
        const MatrixXd central = observation_jacobian(t, c);
        const MatrixXd forward = forward_difference_jacobian(t, c, 1e-4);
        REQUIRE(relative_deviation(central, forward) < 1e-3);
    }
}

TEST_CASE("jacobian cross-check at steps 1e-5 and 1e-7 on 100 random tables") {
    Rng rng(25);
    int tested = 0;
    while (tested < 100) {
        const DhTable t = random_table(rng, 7);
        VectorXd angles(7);
        for (int j = 0; j < 7; ++j)
            angles[j] = rng.uniform(-kPi / 2, kPi / 2);
        const JointConfig c = config_for(angles);
        if (!away_from_branch_cut(t, c))
            continue;
        ++tested;
        const MatrixXd h1 = observation_jacobian(t, c, 1e-5);
        const MatrixXd h2 = observation_jacobian(t, c, 1e-7);
        REQUIRE(relative_deviation(h1, h2) < 1e-3);
    }
}

TEST_CASE("forward kinematics is exactly linear in a and d") {
    Rng rng(26);
    const DhTable t = random_table(rng, 4);
    VectorXd angles(4);
    for (int j = 0; j < 4; ++j)
        angles[j] = rng.uniform(-kPi, kPi);
    const JointConfig c = config_for(angles);
    const VectorXd x = t.params();
    const Vector3d p0 = forward_kinematics(t, c).position;

    for (int j = 0; j < 4; ++j) {
        for (int field : {0, 1}) {  // a, d
            const int idx = 4 * j + field;
            VectorXd x1 = x, x2 = x;
            x1[idx] += 0.125;
            x2[idx] += 0.25;
            const Vector3d d1 = forward_kinematics(t.with_params(x1), c).position - p0;
            const Vector3d d2 = forward_kinematics(t.with_params(x2), c).position - p0;
            REQUIRE((d2 - 2.0 * d1).norm() < 1e-9);
        }
    }
}

TEST_CASE("parameter flattening round trips") {
    Rng rng(27);
    const DhTable t = random_table(rng, 7);
    const DhTable back = t.with_params(t.params());
    for (int j = 0; j < 7; ++j) {
        REQUIRE(back.rows[j].a == t.rows[j].a);
        REQUIRE(back.rows[j].d == t.rows[j].d);
        REQUIRE(back.rows[j].alpha == t.rows[j].alpha);
        REQUIRE(back.rows[j].theta_off == t.rows[j].theta_off);
    }
    REQUIRE_THROWS_AS(t.with_params(VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("normalize/denormalize round trips within 1e-12") {
    Rng rng(28);
    JointConfig c;
    c.lower = VectorXd(3);
    c.upper = VectorXd(3);
    c.angles = VectorXd(3);
    c.lower << -1.0, -2.0, 0.5;
    c.upper << 1.5, -0.5, 2.5;
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 3; ++j)
            c.angles[j] = rng.uniform(c.lower[j], c.upper[j]);
        const JointConfig back = c.with_normalized(c.normalized());
        REQUIRE((back.angles - c.angles).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("table text serialization round trips") {
    Rng rng(29);
    DhTable t = random_table(rng, 7);
    const auto rows = DhTable::rows_from_text(t.to_text());
    REQUIRE(rows.size() == 7);
    for (int j = 0; j < 7; ++j) {
        REQUIRE(rows[j].a == Catch::Approx(t.rows[j].a).epsilon(1e-15));
        REQUIRE(rows[j].alpha == Catch::Approx(t.rows[j].alpha).epsilon(1e-15));
    }
    REQUIRE_THROWS_AS(DhTable::rows_from_text("1 2 three 4\n"), std::invalid_argument);
}
