#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kincal/dh.hpp"
#include "kincal/direct.hpp"
#include "kincal/ekf.hpp"
#include "kincal/noise.hpp"
#include "kincal/occlusion.hpp"
#include "kincal/rng.hpp"
#include "kincal/simworld.hpp"

namespace kincal {

enum class Method { random, al, ucsal, ccsal };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::random: return "r";
        case Method::al: return "al";
        case Method::ucsal: return "ucsal";
        case Method::ccsal: return "ccsal";
    }
    throw std::logic_error("method_name: unknown method");
}

inline Method method_from_name(const std::string& name) {
    if (name == "r" || name == "random") return Method::random;
    if (name == "al") return Method::al;
    if (name == "ucsal") return Method::ucsal;
    if (name == "ccsal") return Method::ccsal;
    throw std::invalid_argument("unknown selection method '" + name + "'");
}

// Tunables of the modified A-optimality cost and its cost-sensitive variants.
struct CostParams {
    double penalty_a = 1.0;   // arctan amplitude of the workspace penalty
    double penalty_b = 10.0;  // arctan steepness per m of predicted hand x
    double gamma = 1e-5;      // movement-penalty weight (UCSAL)
    double delta = 0.5;       // per-joint normalized box half-width (CCSAL)

    void validate() const {
        if (!(penalty_a > 0.0) || !(penalty_b > 0.0))
            throw std::invalid_argument("CostParams: penalty_a and penalty_b must be positive");
        if (gamma < 0.0)
            throw std::invalid_argument("CostParams: gamma must be nonnegative");
        if (!(delta > 0.0) || delta > 1.0)
            throw std::invalid_argument("CostParams: delta must be in (0, 1]");
    }
};

struct SelectionMethod {
    Method method = Method::al;
    CostParams params;
};

// Cost returned when the hypothetical update is degenerate; large but finite
// so the optimizer keeps going.
constexpr double kSingularCost = 1e12;

// Expected posterior parameter MSE of measuring at theta: the hand pose is
// predicted from the current estimate, its camera geometry gives the predicted
// measurement covariance, and the covariance-only EKF update yields the
// hypothetical posterior trace.
inline double base_cost(const JointConfig& theta, const EkfState& ekf, const DhTable& prototype,
                        const NoiseParams& noise, NoiseMode mode, const CameraModel& camera) {
    const Pose hand = forward_kinematics(prototype.with_params(ekf.x_hat), theta);
    if ((hand.position - camera.position).norm() < 1e-9)
        return kSingularCost;
    const CameraGeometry geom = camera_geometry(camera, hand);
    const Matrix6d r_pred = assumed_cov(geom.r, geom.phi_deg, noise, mode);
    const auto trace = hypothetical_posterior_trace(ekf, prototype, theta, r_pred);
    return trace.value_or(kSingularCost);
}

// Full selection cost: base cost inflated by the predicted detection
// probability plus the frontal-workspace arctan penalty on the predicted hand x.
inline double full_cost(const JointConfig& theta, const EkfState& ekf, const DhTable& prototype,
                        const NoiseParams& noise, NoiseMode mode, const CameraModel& camera,
                        const OcclusionMemory& memory, const CostParams& params) {
    const Pose hand = forward_kinematics(prototype.with_params(ekf.x_hat), theta);
    double c0 = kSingularCost;
    if ((hand.position - camera.position).norm() >= 1e-9) {
        const CameraGeometry geom = camera_geometry(camera, hand);
        const Matrix6d r_pred = assumed_cov(geom.r, geom.phi_deg, noise, mode);
        c0 = hypothetical_posterior_trace(ekf, prototype, theta, r_pred).value_or(kSingularCost);
    }
    const double eta = success_mean(theta.normalized(), memory);
    return c0 / eta + params.penalty_a * std::atan(params.penalty_b * hand.position.x());
}

struct SelectionResult {
    JointConfig theta;
    double objective = 0.0;  // the optimizer's (or random draw's) cost value
    int evals_used = 0;
};

// Chooses the next joint configuration. Random draws uniformly over the
// limits; AL minimizes the full cost over the whole normalized cube; UCSAL
// adds gamma times the normalized l1 step from the previous configuration;
// CCSAL minimizes over the box of half-width delta around it.
inline SelectionResult select_next(const SelectionMethod& method, const JointConfig& theta_prev,
                                   const EkfState& ekf, const DhTable& prototype,
                                   const NoiseParams& noise, NoiseMode mode,
                                   const CameraModel& camera, const OcclusionMemory& memory,
                                   const DirectConfig& optimizer, Rng& rng) {
    method.params.validate();
    const int n = theta_prev.size();

    if (method.method == Method::random) {
        SelectionResult res;
        res.theta = uniform_config(theta_prev, rng);
        res.objective = full_cost(res.theta, ekf, prototype, noise, mode, camera, memory, method.params);
        res.evals_used = 1;
        return res;
    }

    const Eigen::VectorXd u_prev = theta_prev.normalized();
    auto cost_at = [&](const Eigen::VectorXd& u) {
        return full_cost(theta_prev.with_normalized(u), ekf, prototype, noise, mode, camera,
                         memory, method.params);
    };

    SearchBox box{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
    DirectResult opt;
    switch (method.method) {
        case Method::al:
            opt = minimize(cost_at, box, optimizer);
            break;
        case Method::ucsal: {
            const double gamma = method.params.gamma;
            opt = minimize(
                [&](const Eigen::VectorXd& u) {
                    return cost_at(u) + gamma * (u - u_prev).lpNorm<1>();
                },
                box, optimizer);
            break;
        }
        case Method::ccsal: {
            const double delta = method.params.delta;
            box.lower = (u_prev.array() - delta).max(0.0);
            box.upper = (u_prev.array() + delta).min(1.0);
            opt = minimize(cost_at, box, optimizer);
            break;
        }
        default:
            throw std::logic_error("select_next: unknown method");
    }

    return SelectionResult{theta_prev.with_normalized(opt.x_best), opt.f_best, opt.evals_used};
}

}  // namespace kincal
