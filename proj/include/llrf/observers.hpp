#pragma once
/**
 * @file observers.hpp
 * @brief Four-channel estimation stack for cavity field regulation and fault
 *        localization.
 *
 * Channels, in per-step execution order:
 *   1. forward-drift observer  — phase of the forward monitor vs the stored
 *      command, folded into phi_fwd_hat by a low-bandwidth smoother;
 *   2. detuning observer       — reflected-wave model innovation, folded into
 *      delta_omega_hat by a normalized first-order gradient step;
 *   3. ESO prediction          — x_pred = A_hat x_hat + B_hat u_prev + d_hat.
 *      B_hat carries the forward update from step 1 (the monitor measured the
 *      elapsed interval directly); A_hat keeps the detuning estimate the
 *      controller used when issuing u_prev — the step-2 update applies from
 *      the next prediction on, which keeps the detuning loop one-step
 *      separated from the pickup residual (and the closed loop stable);
 *   4. receiver-drift observer — pickup orientation vs predicted orientation;
 *   5. pickup de-rotation by -phi_rec_hat, then ESO innovation and update:
 *      x_hat = x_pred + alpha_x r,  d_hat += alpha_d r.
 *
 * The standard comparison observer runs only the ESO (steps 3 and 5 with the
 * raw pickup); all drift/detuning estimates stay frozen at zero.
 *
 * d_hat estimates the *discrete* per-step additive offset (ts-scaled), which
 * the adaptation absorbs directly; no unit conversion happens in the loop.
 */

#include <cstdint>

#include "llrf/cavity.hpp"
#include "llrf/phasor.hpp"

namespace llrf {

/// Descent orientation of the detuning gradient step, pinned once by the
/// finite-difference sign test (see tests and the `validate` suite).
inline constexpr double kDetuningDescentSign = -1.0;

struct ObserverGains {
    double alpha_x = 0.0;      ///< ESO state gain
    double alpha_d = 0.0;      ///< ESO disturbance gain
    double alpha_omega = 0.0;  ///< detuning step size (1.0 = full normalized step)
    double alpha_fwd = 0.0;    ///< forward-drift smoothing weight, (0, 1]
    double alpha_rec = 0.0;    ///< receiver-drift smoothing weight, (0, 1]
    double kappa = 0.0;        ///< cavity-field coupling into the reflected channel

    /// @throws std::invalid_argument on negative gains or smoothing weights > 1.
    void validate() const;

    static ObserverGains proposed_defaults();
    static ObserverGains standard_defaults();
};

enum class ObserverVariant { proposed, standard };

struct EstimatorState {
    Phasor x_hat;                  ///< cavity field estimate
    Phasor d_hat;                  ///< discrete additive-disturbance estimate, volts
    double phi_fwd_hat = 0.0;      ///< forward-chain drift estimate, rad
    double phi_rec_hat = 0.0;      ///< receiver-chain drift estimate, rad
    double delta_omega_hat = 0.0;  ///< detuning estimate, rad/s
    Phasor u_fwd_prev;             ///< stored forward monitor sample
    Phasor u_prev;                 ///< stored command
};

/// One step's measurement set. Forward/reflected monitors describe the
/// elapsed drive interval and are absent on the very first step.
struct Measurements {
    Phasor pickup;
    Phasor forward;
    Phasor reflected;
    bool has_forward = false;
    bool has_reflected = false;
};

struct ObserverOptions {
    /// Magnitude floor for angle extraction; smaller signals skip the update.
    double eps_u = 1e-6;
    /// Drive floor for the detuning update. The gradient normalization divides
    /// by |u_fwd|^2, so noise-level drive must not feed the update.
    double drive_floor = 1e-3;
    /// Compatibility switch: accumulate the raw drift measurement directly
    /// (phi_hat += alpha*phi_raw) instead of the smoothing form. Diverges for
    /// persistent drift; kept for study only.
    bool literal_drift_integrator = false;
};

struct StepDiagnostics {
    Phasor x_pred;
    Phasor innovation;
    double innovation_norm = 0.0;
    bool skipped_fwd = false;
    bool skipped_detuning = false;
    bool skipped_rec = false;
};

/// ESO prediction with the estimator's current model matrices.
Phasor eso_predict(const EstimatorState& est, const Phasor& u_prev,
                   const CavityParams& params);

/// Innovation against the (already de-rotated, if applicable) pickup.
inline Phasor eso_innovation(const Phasor& y_aligned, const Phasor& x_pred) {
    return y_aligned - x_pred;
}

/// ESO measurement update: x_hat = x_pred + alpha_x r, d_hat += alpha_d r.
void eso_update(EstimatorState& est, const Phasor& x_pred, const Phasor& r,
                const ObserverGains& gains);

/// Forward-drift update from the forward monitor versus the issued command.
/// Degenerate magnitudes (below eps_u) skip the update and set the flag.
void fwd_drift_update(EstimatorState& est, const Phasor& u_fwd_meas, const Phasor& u_cmd,
                      const ObserverGains& gains, const ObserverOptions& opts,
                      StepDiagnostics* diag);

/// Reflected-wave model: u_fwd - kappa*(I - (delta_omega_hat/omega_half)J)^{-1} u_fwd.
/// The inner matrix has det 1 + (delta_omega_hat/omega_half)^2 >= 1, so the
/// inverse always exists.
Phasor predict_reflected(const Phasor& u_fwd_prev, double delta_omega_hat, double kappa,
                         double omega_half);

/// Detuning update: normalized gradient step on the squared reflected
/// innovation, first order in detuning. Skipped below the drive floor.
void detuning_update(EstimatorState& est, const Phasor& u_refl_meas,
                     const ObserverGains& gains, const CavityParams& params,
                     const ObserverOptions& opts, StepDiagnostics* diag);

/// Receiver-drift update from raw pickup orientation vs predicted orientation.
void rec_drift_update(EstimatorState& est, const Phasor& y_raw, const Phasor& x_pred,
                      const ObserverGains& gains, const ObserverOptions& opts,
                      StepDiagnostics* diag);

/// Full per-step pipeline in the prescribed order; returns diagnostics.
StepDiagnostics observer_step(EstimatorState& est, const Measurements& meas,
                              const Phasor& u_prev, const ObserverGains& gains,
                              ObserverVariant variant, const CavityParams& params,
                              const ObserverOptions& opts = {});

}  // namespace llrf
