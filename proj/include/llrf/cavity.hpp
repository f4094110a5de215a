#pragma once
/**
 * @file cavity.hpp
 * @brief Ground-truth discrete-time cavity plant and its measurement channels.
 *
 * The cavity envelope obeys (continuous time, baseband frame)
 *
 *     dx/dt = (delta_omega*J - omega_half*I) x + omega_half*R(phi_fwd) u + d,
 *
 * discretized with a forward Euler step of length ts:
 *
 *     x[k+1] = A_k x[k] + B_k u[k] + ts*d[k],
 *     A_k = I + ts*(delta_omega*J - omega_half*I),
 *     B_k = ts*omega_half*R(phi_fwd).
 *
 * The additive disturbance d is kept in continuous-time units (volts/s); the
 * ts factor is applied at the stepping point so d's meaning survives sampling
 * changes. Drift values are held constant over each step (zero-order hold).
 *
 * Measurement channels:
 *   pickup     y      = R(phi_rec) x + noise
 *   forward    u_fwd  = R(phi_fwd) u + noise
 *   reflected  u_refl = u_fwd - kappa x + noise
 */

#include <stdexcept>

#include "llrf/phasor.hpp"
#include "llrf/rng.hpp"

namespace llrf {

/// Physical/loop constants of one cavity station.
struct CavityParams {
    double omega0 = 0.0;      ///< nominal angular frequency, rad/s
    double q_loaded = 0.0;    ///< loaded quality factor
    double omega_half = 0.0;  ///< loaded half-bandwidth omega0/(2*q_loaded), rad/s
    double ts = 0.0;          ///< sampling period, s
    /// Model-fidelity switch: build rotation matrices with the first-order
    /// form I + theta*J instead of the exact rotation.
    bool small_angle = false;

    /**
     * Validating constructor helper; omega_half is always derived.
     * @throws std::invalid_argument on omega0/q_loaded/ts <= 0 or when the
     *         undriven Euler pole would be unstable (ts*omega_half >= 2).
     */
    static CavityParams make(double omega0, double q_loaded, double ts,
                             bool small_angle = false);
};

/// Per-step ground truth.
struct TruthState {
    Phasor x;                  ///< cavity field, normalized volts
    double phi_fwd = 0.0;      ///< forward-chain phase drift, rad
    double phi_rec = 0.0;      ///< receiver-chain phase drift, rad
    double delta_omega = 0.0;  ///< detuning, rad/s
    Phasor d;                  ///< additive disturbance rate, volts/s
};

/// Per-channel Gaussian noise standard deviations (per IQ component).
struct ChannelNoise {
    double sigma_pickup = 1e-4;
    double sigma_reflected = 1e-4;
    double sigma_reference = 1e-4;
    double sigma_forward = 1e-4;
};

struct DiscreteMatrices {
    Mat2 a;
    Mat2 b;
};

/// Rotation used by plant and model matrices, honoring the fidelity switch.
inline Mat2 model_rotation(double theta, bool small_angle) {
    return small_angle ? rot_small(theta) : rot_exact(theta);
}

/// Euler-discretized state and control matrices for one step.
DiscreteMatrices build_discrete_matrices(const CavityParams& params, double delta_omega,
                                         double phi_fwd);

/// One plant step: A_k x + B_k u + ts*d with the state's true drift values.
Phasor step_truth(const TruthState& state, const Phasor& u_cmd, const CavityParams& params);

/// Pickup probe: receiver-rotated field plus per-component Gaussian noise.
Phasor measure_pickup(const Phasor& x, double phi_rec, double sigma, RngStream& rng);

/// Forward monitor: drive-chain-rotated command plus noise.
Phasor measure_forward(const Phasor& u_cmd, double phi_fwd, double sigma, RngStream& rng);

/// Reflected monitor: incident wave minus the coupled cavity field, plus noise.
Phasor measure_reflected(const Phasor& u_fwd, const Phasor& x, double kappa, double sigma,
                         RngStream& rng);

}  // namespace llrf
