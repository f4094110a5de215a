#pragma once
/**
 * @file controller.hpp
 * @brief Feedforward model inversion plus one-step LQR feedback.
 *
 * Each step the controller rebuilds the model matrices from the current
 * estimates (they move with delta_omega_hat and phi_fwd_hat) and issues
 *
 *     u_ff = B_hat^{-1} (x*_{k+1} - A_hat x_hat - d_hat)
 *     u_fb = K (x*_k - x_hat),  K = (B_hat' Q B_hat + R)^{-1} B_hat' Q A_hat
 *     u    = u_ff + u_fb.
 *
 * K minimizes e'Qe + u_fb'R u_fb over one step of the estimated error
 * recursion e_{k+1} = A_hat e_k + B_hat u_fb. The closed-form 2x2 inverse
 * keeps the per-step recompute trivial.
 */

#include "llrf/cavity.hpp"
#include "llrf/observers.hpp"
#include "llrf/phasor.hpp"

namespace llrf {

struct ControlWeights {
    Mat2 q = Mat2::scaled_identity(0.1);    ///< error penalty
    Mat2 r = Mat2::scaled_identity(100.0);  ///< effort penalty

    /// Both must be symmetric PSD with at least one positive definite.
    /// @throws std::invalid_argument otherwise.
    void validate() const;

    static ControlWeights defaults() { return {}; }
};

struct DriveCommand {
    Phasor u_ff;
    Phasor u_fb;
    Phasor u_total;  ///< u_ff + u_fb (clamped only if a saturation limit is set)
};

/// Feedforward inversion through the estimated model.
/// @throws std::domain_error when B_hat is near-singular (configuration fault).
Phasor feedforward(const Phasor& x_star_next, const Phasor& x_hat, const Phasor& d_hat,
                   const Mat2& a_hat, const Mat2& b_hat);

/// One-step LQR gain.
Mat2 lqr_gain(const Mat2& a_hat, const Mat2& b_hat, const ControlWeights& weights);

inline Phasor feedback(const Mat2& k, const Phasor& x_star, const Phasor& x_hat) {
    return k * (x_star - x_hat);
}

/// Composite command for the interval [k, k+1). u_max = 0 leaves commands
/// unbounded; a positive value clamps |u_total| (hook only, off by default).
DriveCommand control_step(const EstimatorState& est, const Phasor& x_star,
                          const Phasor& x_star_next, const ControlWeights& weights,
                          const CavityParams& params, double u_max = 0.0);

}  // namespace llrf
