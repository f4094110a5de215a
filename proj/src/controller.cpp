#include "llrf/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace llrf {

void ControlWeights::validate() const {
    auto reject = [](const char* why) {
        throw std::invalid_argument(std::string("control weights: ") + why);
    };
    auto symmetric = [](const Mat2& m) { return m.m01 == m.m10; };
    // 2x2 PSD: symmetric, non-negative diagonal and determinant.
    auto psd = [&](const Mat2& m) {
        return symmetric(m) && m.m00 >= 0.0 && m.m11 >= 0.0 && m.det() >= 0.0;
    };
    auto pd = [&](const Mat2& m) {
        return symmetric(m) && m.m00 > 0.0 && m.det() > 0.0;
    };
    if (!psd(q)) reject("q_weight must be symmetric positive semidefinite");
    if (!psd(r)) reject("r_weight must be symmetric positive semidefinite");
    if (!pd(q) && !pd(r)) reject("at least one weight must be positive definite");
}

Phasor feedforward(const Phasor& x_star_next, const Phasor& x_hat, const Phasor& d_hat,
                   const Mat2& a_hat, const Mat2& b_hat) {
    Mat2 b_inv;
    try {
        b_inv = b_hat.inverse();
    } catch (const std::domain_error&) {
        throw std::domain_error(
            "feedforward: control matrix near-singular, |det(B_hat)| = " +
            std::to_string(std::fabs(b_hat.det())) +
            " (check ts and omega_half configuration)");
    }
    return b_inv * (x_star_next - a_hat * x_hat - d_hat);
}

Mat2 lqr_gain(const Mat2& a_hat, const Mat2& b_hat, const ControlWeights& weights) {
    const Mat2 bt = b_hat.transpose();
    const Mat2 normal = bt * weights.q * b_hat + weights.r;
    Mat2 normal_inv;
    try {
        normal_inv = normal.inverse();
    } catch (const std::domain_error&) {
        throw std::domain_error("lqr_gain: B'QB + R is singular (degenerate weights)");
    }
    return normal_inv * (bt * weights.q * a_hat);
}

DriveCommand control_step(const EstimatorState& est, const Phasor& x_star,
                          const Phasor& x_star_next, const ControlWeights& weights,
                          const CavityParams& params, double u_max) {
    const auto [a_hat, b_hat] =
        build_discrete_matrices(params, est.delta_omega_hat, est.phi_fwd_hat);
    DriveCommand cmd;
    cmd.u_ff = feedforward(x_star_next, est.x_hat, est.d_hat, a_hat, b_hat);
    const Mat2 k = lqr_gain(a_hat, b_hat, weights);
    cmd.u_fb = feedback(k, x_star, est.x_hat);
    cmd.u_total = cmd.u_ff + cmd.u_fb;
    if (u_max > 0.0) {
        const double mag = cmd.u_total.norm();
        if (mag > u_max) cmd.u_total = (u_max / mag) * cmd.u_total;
    }
    return cmd;
}

}  // namespace llrf
