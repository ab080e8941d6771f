#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace kincal {

// Sampling history at one joint configuration, in normalized [0,1]^n coordinates.
struct AttemptRecord {
    Eigen::VectorXd theta_norm;
    int successes = 0;
    int failures = 0;
};

// Inputs of the kernel-smoothed Beta visibility predictor.
struct OcclusionMemory {
    std::vector<AttemptRecord> records;
    double prior_a0 = 1.0;
    double prior_b0 = 1.0;
    double length_scale = 0.15;  // kernel width in normalized joint units
};

// Squared exponential kernel; 1 at zero distance, strictly decreasing.
inline double kernel(const Eigen::VectorXd& theta_star, const Eigen::VectorXd& theta_k,
                     double length_scale) {
    const double d2 = (theta_star - theta_k).squaredNorm();
    return std::exp(-d2 / (2.0 * length_scale * length_scale));
}

struct BetaParams {
    double alpha = 0.0;
    double beta = 0.0;
};

// Kernel-weighted counts plus the Beta prior pseudo-counts.
inline BetaParams posterior(const Eigen::VectorXd& theta_star, const OcclusionMemory& memory) {
    BetaParams p{memory.prior_a0, memory.prior_b0};
    for (const AttemptRecord& rec : memory.records) {
        const double w = kernel(theta_star, rec.theta_norm, memory.length_scale);
        p.alpha += w * rec.successes;
        p.beta += w * rec.failures;
    }
    return p;
}

// Predicted sampling success mean probability; in (0, 1) for positive priors.
inline double success_mean(const Eigen::VectorXd& theta_star, const OcclusionMemory& memory) {
    const BetaParams p = posterior(theta_star, memory);
    return p.alpha / (p.alpha + p.beta);
}

// Adds one attempt outcome. An attempt at a configuration already present
// (componentwise within 1e-9) increments that record; otherwise a record is appended.
inline OcclusionMemory record_attempt(OcclusionMemory memory, const Eigen::VectorXd& theta_norm,
                                      bool success) {
    for (AttemptRecord& rec : memory.records) {
        if (rec.theta_norm.size() == theta_norm.size() &&
            ((rec.theta_norm - theta_norm).array().abs() <= 1e-9).all()) {
            (success ? rec.successes : rec.failures) += 1;
            return memory;
        }
    }
    AttemptRecord rec;
    rec.theta_norm = theta_norm;
    (success ? rec.successes : rec.failures) = 1;
    memory.records.push_back(std::move(rec));
    return memory;
}

}  // namespace kincal
