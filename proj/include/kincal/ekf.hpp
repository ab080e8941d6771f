#pragma once

#include <Eigen/Dense>
#include <concepts>
#include <optional>

#include "kincal/dh.hpp"
#include "kincal/so3.hpp"

namespace kincal {

// Filter state over the flattened DH parameter vector.
struct EkfState {
    Eigen::VectorXd x_hat;
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;

    int dim() const { return static_cast<int>(x_hat.size()); }
};

// One hand-pose observation with the covariance the filter is told to assume.
struct Measurement {
    Vector6d z;
    Matrix6d R;
    JointConfig theta;
};

// Observation model interface: predicted observation, its Jacobian in the
// parameters, and the measurement residual z (-) prediction.
template <typename M>
concept observation_model = requires(const M& m, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    { m.predict(x) } -> std::convertible_to<Eigen::VectorXd>;
    { m.jacobian(x) } -> std::convertible_to<Eigen::MatrixXd>;
    { m.residual(z, x) } -> std::convertible_to<Eigen::VectorXd>;
};

// Hand-pose observation at a fixed joint configuration. The residual treats
// position additively and orientation through the relative-rotation log map,
// which keeps the innovation on the principal branch.
struct PoseObservationModel {
    DhTable prototype;  // supplies base transform and joint count
    JointConfig theta;

    Eigen::VectorXd predict(const Eigen::VectorXd& x) const {
        return pose_to_obs(forward_kinematics(prototype.with_params(x), theta));
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
        return observation_jacobian(prototype.with_params(x), theta);
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& z, const Eigen::VectorXd& x) const {
        const Eigen::VectorXd pred = predict(x);
        Vector6d r;
        r.head<3>() = z.head<3>() - pred.head<3>();
        const Eigen::Matrix3d o_meas = so3_exp(z.tail<3>());
        const Eigen::Matrix3d o_pred = so3_exp(pred.tail<3>());
        const Eigen::Vector3d rel = so3_log(o_meas * o_pred.transpose());
        // Pull the relative-rotation log back into rotation-vector coordinates
        // (the coordinates H differentiates and R describes): the left-Jacobian
        // identity exp(w + e) = exp(J_l(w) e) exp(w) gives rel = J_l(w_pred) dw,
        // so dw = J_l^-1 rel. Equivalent to the wrapped difference of rotation
        // vectors, but computed via the relative log so it stays on the
        // principal branch.
        r.tail<3>() = so3_left_jacobian(pred.tail<3>()).partialPivLu().solve(rel);
        return r;
    }
};

// Predict step: parameters are constant in time, covariance inflates by Q.
inline EkfState predict(EkfState state) {
    state.P += state.Q;
    return state;
}

struct UpdateResult {
    EkfState state;
    bool ok = true;  // false: innovation covariance not positive definite, prior kept
};

namespace detail {

// Covariance half of the update. Returns the posterior P, or nullopt when S
// is not positive definite.
inline std::optional<Eigen::MatrixXd> posterior_covariance(const Eigen::MatrixXd& p_prior,
                                                           const Eigen::MatrixXd& h,
                                                           const Eigen::MatrixXd& r,
                                                           Eigen::MatrixXd* kalman_gain = nullptr) {
    const Eigen::MatrixXd s = h * p_prior * h.transpose() + r;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        return std::nullopt;
    const Eigen::MatrixXd ph_t = p_prior * h.transpose();       // P H^T
    const Eigen::MatrixXd k_t = llt.solve(ph_t.transpose());    // K^T = S^-1 H P
    Eigen::MatrixXd p_post = p_prior - ph_t * k_t;              // P - K S K^T
    p_post = 0.5 * (p_post + p_post.transpose());
    if (kalman_gain)
        *kalman_gain = k_t.transpose();
    return p_post;
}

}  // namespace detail

// Update step on an already-predicted state. S = H P H^T + R must be
// invertible; otherwise the prior is kept and ok is false.
template <observation_model M>
UpdateResult update(const EkfState& state, const Eigen::VectorXd& z, const Eigen::MatrixXd& r,
                    const M& model) {
    const Eigen::MatrixXd h = model.jacobian(state.x_hat);
    Eigen::MatrixXd gain;
    const auto p_post = detail::posterior_covariance(state.P, h, r, &gain);
    if (!p_post)
        return UpdateResult{state, false};
    EkfState next = state;
    next.x_hat = state.x_hat + gain * model.residual(z, state.x_hat);
    next.P = *p_post;
    return UpdateResult{next, true};
}

inline UpdateResult update(const EkfState& state, const Measurement& meas, const DhTable& prototype) {
    return update(state, Eigen::VectorXd(meas.z), Eigen::MatrixXd(meas.R),
                  PoseObservationModel{prototype, meas.theta});
}

// Expected posterior trace tr(P_{k+1|k+1}) of a hypothetical measurement at
// the model's configuration with predicted covariance r_pred. Runs only the
// covariance halves of predict and update; the state itself is untouched.
template <observation_model M>
std::optional<double> hypothetical_posterior_trace(const EkfState& state, const M& model,
                                                   const Eigen::MatrixXd& r_pred) {
    const Eigen::MatrixXd p_pred = state.P + state.Q;
    const Eigen::MatrixXd h = model.jacobian(state.x_hat);
    const auto p_post = detail::posterior_covariance(p_pred, h, r_pred);
    if (!p_post)
        return std::nullopt;
    return p_post->trace();
}

inline std::optional<double> hypothetical_posterior_trace(const EkfState& state,
                                                          const DhTable& prototype,
                                                          const JointConfig& theta,
                                                          const Matrix6d& r_pred) {
    return hypothetical_posterior_trace(state, PoseObservationModel{prototype, theta},
                                        Eigen::MatrixXd(r_pred));
}

// Diagonal prior covariance matching uniform initialization widths (variance w^2/12);
// parameter order per joint is a, d, alpha, theta_off.
inline Eigen::MatrixXd initial_covariance(int joint_count, double width_linear_m,
                                          double width_angular_rad) {
    const double var_lin = width_linear_m * width_linear_m / 12.0;
    const double var_ang = width_angular_rad * width_angular_rad / 12.0;
    Eigen::VectorXd diag(4 * joint_count);
    for (int j = 0; j < joint_count; ++j) {
        diag[4 * j + 0] = var_lin;
        diag[4 * j + 1] = var_lin;
        diag[4 * j + 2] = var_ang;
        diag[4 * j + 3] = var_ang;
    }
    return diag.asDiagonal();
}

}  // namespace kincal
