#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "kincal/selection.hpp"

using namespace kincal;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
    DhTable table;
    JointConfig limits;
    EkfState ekf;
    NoiseParams noise{4e-4, 5e-6, 1e-4};
    CameraModel camera;
    OcclusionMemory memory;
    DirectConfig optimizer{80, 1e-4};

    Fixture() {
        table.rows = {DhRow{0.3, 0.1, 0.4, 0.0}, DhRow{0.25, 0.0, -0.6, 0.2},
                      DhRow{0.2, 0.05, 0.0, 0.0}};
        limits.lower = VectorXd::Constant(3, -kPi / 2);
        limits.upper = VectorXd::Constant(3, kPi / 2);
        limits.angles = VectorXd::Zero(3);

        Rng rng(101);
        ekf.x_hat = perturb_initial_estimate(table, rng).params();
        ekf.P = initial_covariance(3, 0.046, 54.0 * kPi / 180.0);
        ekf.Q = 1e-10 * Eigen::MatrixXd::Identity(12, 12);

        camera.position = Vector3d(0.1, 0.0, 0.9);
        camera.optical_axis = Vector3d(0, 0, -1);
        camera.fov_half_angle_deg = 80.0;
    }

    JointConfig at(double a, double b, double c) const {
        JointConfig cfg = limits;
        cfg.angles = Vector3d(a, b, c);
        return cfg;
    }

    double full_cost_at(const JointConfig& theta, const CostParams& params,
                        NoiseMode mode = NoiseMode::pose_dependent) const {
        return full_cost(theta, ekf, table, noise, mode, camera, memory, params);
    }
};

}  // namespace

TEST_CASE("base cost approaches tr(P+Q) when the measurement carries no information") {
    Fixture f;
    const double bound = (f.ekf.P + f.ekf.Q).trace();
    NoiseParams huge = f.noise;
    huge.noise_a *= 1e12;
    huge.noise_b *= 1e12;
    const double c = base_cost(f.at(0.3, -0.4, 0.8), f.ekf, f.table, huge,
                               NoiseMode::pose_dependent, f.camera);
    REQUIRE(c == Catch::Approx(bound).epsilon(1e-6));
}

TEST_CASE("base cost never exceeds tr(P+Q)") {
    Fixture f;
    Rng rng(102);
    const double bound = (f.ekf.P + f.ekf.Q).trace();
    for (int i = 0; i < 200; ++i) {
        const JointConfig theta = uniform_config(f.limits, rng);
        const double c = base_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent, f.camera);
        REQUIRE(c <= bound + 1e-12);
    }
}

TEST_CASE("base cost equals the hypothetical-trace route") {
    Fixture f;
    Rng rng(103);
    for (int i = 0; i < 20; ++i) {
        const JointConfig theta = uniform_config(f.limits, rng);
        const Pose hand = forward_kinematics(f.table.with_params(f.ekf.x_hat), theta);
        const auto geom = camera_geometry(f.camera, hand);
        const Matrix6d r_pred = assumed_cov(geom.r, geom.phi_deg, f.noise, NoiseMode::pose_dependent);
        const auto expected = hypothetical_posterior_trace(f.ekf, f.table, theta, r_pred);
        REQUIRE(expected.has_value());
        REQUIRE(base_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent, f.camera) ==
                *expected);
    }
}

TEST_CASE("full cost reduces to the base cost under neutral modifiers") {
    Fixture f;
    // planar chain rotated into the x = 0 plane: the workspace penalty vanishes
    f.table.rows = {DhRow{0.4, 0, 0, 0}, DhRow{0.35, 0, 0, 0}, DhRow{0.3, 0, 0, 0}};
    f.table.base_transform.linear() = rot_y(kPi / 2);
    f.ekf.x_hat = f.table.params();
    f.memory.prior_a0 = 1e12;  // overwhelming success history, eta ~ 1
    f.memory.prior_b0 = 1e-3;

    const JointConfig theta = f.at(0.5, -0.3, 0.2);
    const double c0 = base_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent, f.camera);
    const double fc = f.full_cost_at(theta, CostParams{});
    REQUIRE(fc == Catch::Approx(c0).epsilon(1e-9));
}

TEST_CASE("halving the detection likelihood doubles the information term") {
    Fixture f;
    const JointConfig theta = f.at(0.4, 0.1, -0.6);
    const CostParams params;

    const Pose hand = forward_kinematics(f.table.with_params(f.ekf.x_hat), theta);
    const double penalty = params.penalty_a * std::atan(params.penalty_b * hand.position.x());

    OcclusionMemory half;  // uniform prior: eta = 1/2
    OcclusionMemory quarter;
    quarter.prior_a0 = 1.0;
    quarter.prior_b0 = 3.0;  // eta = 1/4

    const double fc_half = full_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent,
                                     f.camera, half, params);
    const double fc_quarter = full_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent,
                                        f.camera, quarter, params);
    REQUIRE(fc_quarter - penalty == Catch::Approx(2.0 * (fc_half - penalty)).epsilon(1e-12));
}

TEST_CASE("the workspace penalty saturates at penalty_a * pi/2") {
    Fixture f;
    f.table.base_transform.translation() = Vector3d(1e6, 0, 0);
    f.ekf.x_hat = f.table.params();
    const JointConfig theta = f.at(0.2, 0.4, -0.1);
    const CostParams params;

    const double c0 = base_cost(theta, f.ekf, f.table, f.noise, NoiseMode::pose_dependent, f.camera);
    const double fc = f.full_cost_at(theta, params);
    const double eta = success_mean(theta.normalized(), f.memory);
    REQUIRE(fc - c0 / eta == Catch::Approx(params.penalty_a * kPi / 2).margin(1e-5));
}

TEST_CASE("random selection is seeded and respects limits") {
    Fixture f;
    const SelectionMethod method{Method::random, CostParams{}};
    Rng rng1(104), rng2(104), rng3(105);
    const auto a = select_next(method, f.at(0, 0, 0), f.ekf, f.table, f.noise,
                               NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng1);
    const auto b = select_next(method, f.at(0, 0, 0), f.ekf, f.table, f.noise,
                               NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng2);
    const auto c = select_next(method, f.at(0, 0, 0), f.ekf, f.table, f.noise,
                               NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng3);
    REQUIRE(a.theta.angles == b.theta.angles);
    REQUIRE(a.theta.angles != c.theta.angles);
    REQUIRE(a.theta.within_limits());
}

TEST_CASE("UCSAL with zero gamma reproduces AL exactly") {
    Fixture f;
    Rng rng(106);
    CostParams params;
    params.gamma = 0.0;
    const JointConfig prev = f.at(0.3, -0.2, 0.5);
    const auto al = select_next({Method::al, params}, prev, f.ekf, f.table, f.noise,
                                NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    const auto ucsal = select_next({Method::ucsal, params}, prev, f.ekf, f.table, f.noise,
                                   NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    REQUIRE(al.theta.angles == ucsal.theta.angles);
    REQUIRE(al.objective == ucsal.objective);
}

TEST_CASE("CCSAL with delta = 1 reproduces AL exactly") {
    Fixture f;
    Rng rng(107);
    CostParams params;
    params.delta = 1.0;
    const JointConfig prev = f.at(-0.4, 0.1, 0.2);
    const auto al = select_next({Method::al, params}, prev, f.ekf, f.table, f.noise,
                                NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    const auto ccsal = select_next({Method::ccsal, params}, prev, f.ekf, f.table, f.noise,
                                   NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    REQUIRE(al.theta.angles == ccsal.theta.angles);
    REQUIRE(al.objective == ccsal.objective);
}

TEST_CASE("a huge movement penalty pins UCSAL to the previous configuration") {
    Fixture f;
    Rng rng(108);
    CostParams params;
    params.gamma = 1e6;
    const JointConfig prev = f.at(0.2, -0.5, 0.7);
    const VectorXd u_prev = prev.normalized();

    const auto res = select_next({Method::ucsal, params}, prev, f.ekf, f.table, f.noise,
                                 NoiseMode::pose_dependent, f.camera, f.memory,
                                 DirectConfig{200, 1e-4}, rng);
    REQUIRE((res.theta.normalized() - u_prev).lpNorm<1>() <= 1e-2);

    // grid oracle over the penalized objective: the minimum sits at the grid
    // point closest to the previous configuration
    double best = std::numeric_limits<double>::infinity();
    VectorXd best_u(3);
    VectorXd u(3);
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j)
            for (int k = 0; k <= 10; ++k) {
                u << i / 10.0, j / 10.0, k / 10.0;
                const double v = f.full_cost_at(prev.with_normalized(u), params) +
                                 params.gamma * (u - u_prev).lpNorm<1>();
                if (v < best) {
                    best = v;
                    best_u = u;
                }
            }
    VectorXd nearest(3);
    for (int i = 0; i < 3; ++i)
        nearest[i] = std::round(u_prev[i] * 10.0) / 10.0;
    REQUIRE(best_u == nearest);
}

TEST_CASE("every method returns a feasible configuration; CCSAL honors its box") {
    Fixture f;
    Rng rng(109);
    CostParams params;
    params.delta = 0.15;
    const JointConfig prev = f.at(1.3, -1.2, 0.0);  // near the limits
    for (Method m : {Method::random, Method::al, Method::ucsal, Method::ccsal}) {
        const auto res = select_next({m, params}, prev, f.ekf, f.table, f.noise,
                                     NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
        REQUIRE(res.theta.within_limits(1e-12));
        if (m == Method::ccsal) {
            const VectorXd du = (res.theta.normalized() - prev.normalized()).cwiseAbs();
            REQUIRE(du.maxCoeff() <= params.delta + 1e-12);
        }
    }
}

TEST_CASE("the reported objective matches re-evaluating the cost at the result") {
    Fixture f;
    Rng rng(110);
    const CostParams params;
    const JointConfig prev = f.at(0.1, 0.4, -0.3);
    const VectorXd u_prev = prev.normalized();

    const auto al = select_next({Method::al, params}, prev, f.ekf, f.table, f.noise,
                                NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    REQUIRE(f.full_cost_at(al.theta, params) == Catch::Approx(al.objective).margin(1e-12));

    const auto uc = select_next({Method::ucsal, params}, prev, f.ekf, f.table, f.noise,
                                NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    const double uc_obj = f.full_cost_at(uc.theta, params) +
                          params.gamma * (uc.theta.normalized() - u_prev).lpNorm<1>();
    REQUIRE(uc_obj == Catch::Approx(uc.objective).margin(1e-12));

    const auto cc = select_next({Method::ccsal, params}, prev, f.ekf, f.table, f.noise,
                                NoiseMode::pose_dependent, f.camera, f.memory, f.optimizer, rng);
    REQUIRE(f.full_cost_at(cc.theta, params) == Catch::Approx(cc.objective).margin(1e-12));
}

TEST_CASE("the l1 step is nonincreasing in gamma on a fixed instance") {
    Fixture f;
    const JointConfig prev = f.at(0.25, -0.35, 0.45);
    const VectorXd u_prev = prev.normalized();
    double prev_step = std::numeric_limits<double>::infinity();
    for (double gamma : {0.0, 1e-5, 1e-3, 1e-1}) {
        Rng rng(111);
        CostParams params;
        params.gamma = gamma;
        const auto res = select_next({Method::ucsal, params}, prev, f.ekf, f.table, f.noise,
                                     NoiseMode::pose_dependent, f.camera, f.memory,
                                     DirectConfig{120, 1e-4}, rng);
        const double step = (res.theta.normalized() - u_prev).lpNorm<1>();
        REQUIRE(step <= prev_step + 1e-12);
        prev_step = step;
    }
}

TEST_CASE("method names round trip and reject junk") {
    for (Method m : {Method::random, Method::al, Method::ucsal, Method::ccsal})
        REQUIRE(method_from_name(method_name(m)) == m);
    REQUIRE(method_from_name("random") == Method::random);
    REQUIRE_THROWS_AS(method_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("cost parameter validation") {
    CostParams p;
    REQUIRE_NOTHROW(p.validate());
    p.delta = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = CostParams{};
    p.penalty_a = -1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = CostParams{};
    p.gamma = -1e-9;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}
