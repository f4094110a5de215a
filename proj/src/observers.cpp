#include "llrf/observers.hpp"

#include <stdexcept>

namespace llrf {

void ObserverGains::validate() const {
    auto reject = [](const char* why) {
        throw std::invalid_argument(std::string("observer gains: ") + why);
    };
    if (alpha_x < 0.0 || alpha_d < 0.0 || alpha_omega < 0.0 || alpha_fwd < 0.0 ||
        alpha_rec < 0.0 || kappa < 0.0) {
        reject("all gains must be >= 0");
    }
    if (alpha_fwd > 1.0 || alpha_rec > 1.0) {
        reject("drift smoothing weights must be <= 1");
    }
}

ObserverGains ObserverGains::proposed_defaults() {
    return {0.1, 1e-4, 1.0, 0.9754, 0.7316, 200.0};
}

ObserverGains ObserverGains::standard_defaults() {
    return {0.1, 0.3, 0.0, 0.0, 0.0, 200.0};
}

Phasor eso_predict(const EstimatorState& est, const Phasor& u_prev,
                   const CavityParams& params) {
    const auto [a, b] =
        build_discrete_matrices(params, est.delta_omega_hat, est.phi_fwd_hat);
    return a * est.x_hat + b * u_prev + est.d_hat;
}

void eso_update(EstimatorState& est, const Phasor& x_pred, const Phasor& r,
                const ObserverGains& gains) {
    est.x_hat = x_pred + gains.alpha_x * r;
    est.d_hat = est.d_hat + gains.alpha_d * r;
}

namespace {

/// Shared smoother for the two drift channels. All differencing is wrapped so
/// 2*pi jumps never reach the integrator.
void drift_update(double& phi_hat, double phi_raw, double alpha, bool literal) {
    if (literal) {
        phi_hat += alpha * phi_raw;
    } else {
        phi_hat += alpha * wrap_angle(phi_raw - phi_hat);
    }
}

}  // namespace

void fwd_drift_update(EstimatorState& est, const Phasor& u_fwd_meas, const Phasor& u_cmd,
                      const ObserverGains& gains, const ObserverOptions& opts,
                      StepDiagnostics* diag) {
    if (u_fwd_meas.norm() < opts.eps_u || u_cmd.norm() < opts.eps_u) {
        if (diag) diag->skipped_fwd = true;
        return;
    }
    const double phi_raw = wrap_angle(angle(u_fwd_meas) - angle(u_cmd));
    drift_update(est.phi_fwd_hat, phi_raw, gains.alpha_fwd,
                 opts.literal_drift_integrator);
}

Phasor predict_reflected(const Phasor& u_fwd_prev, double delta_omega_hat, double kappa,
                         double omega_half) {
    const Mat2 m = Mat2::identity() - (delta_omega_hat / omega_half) * Mat2::j();
    return u_fwd_prev - kappa * (m.inverse() * u_fwd_prev);
}

void detuning_update(EstimatorState& est, const Phasor& u_refl_meas,
                     const ObserverGains& gains, const CavityParams& params,
                     const ObserverOptions& opts, StepDiagnostics* diag) {
    const double drive_sq = est.u_fwd_prev.norm_sq();
    if (drive_sq < opts.drive_floor * opts.drive_floor) {
        if (diag) diag->skipped_detuning = true;
        return;
    }
    const Phasor predicted = predict_reflected(est.u_fwd_prev, est.delta_omega_hat,
                                               gains.kappa, params.omega_half);
    const Phasor r_refl = u_refl_meas - predicted;
    // First-order gradient of |r_refl|^2 w.r.t. the detuning estimate is
    // proportional to (kappa/omega_half) * r'Ju; the step divides the gradient
    // scale back out (Gauss-Newton normalization), so alpha_omega = 1 moves to
    // the first-order optimum in one step.
    const Phasor ju = Mat2::j() * est.u_fwd_prev;
    const double step = (params.omega_half / gains.kappa) * dot(r_refl, ju) / drive_sq;
    est.delta_omega_hat += kDetuningDescentSign * gains.alpha_omega * step;
}

void rec_drift_update(EstimatorState& est, const Phasor& y_raw, const Phasor& x_pred,
                      const ObserverGains& gains, const ObserverOptions& opts,
                      StepDiagnostics* diag) {
    if (y_raw.norm() < opts.eps_u || x_pred.norm() < opts.eps_u) {
        if (diag) diag->skipped_rec = true;
        return;
    }
    const double phi_raw = wrap_angle(angle(y_raw) - angle(x_pred));
    drift_update(est.phi_rec_hat, phi_raw, gains.alpha_rec,
                 opts.literal_drift_integrator);
}

StepDiagnostics observer_step(EstimatorState& est, const Measurements& meas,
                              const Phasor& u_prev, const ObserverGains& gains,
                              ObserverVariant variant, const CavityParams& params,
                              const ObserverOptions& opts) {
    StepDiagnostics diag;

    // The prediction over [k-1, k) uses the detuning estimate the controller
    // inverted when it issued u_prev; the update below only reaches the
    // *next* prediction. Feeding it back into the same step's prediction
    // couples the detuning innovation into the pickup residual and tips the
    // closed loop unstable at nominal gains (loop spectral radius 1.08 vs
    // 0.90 with the one-step separation).
    const double delta_omega_pred = est.delta_omega_hat;

    if (variant == ObserverVariant::proposed) {
        if (meas.has_forward) {
            // The forward monitor measured the drive interval just elapsed,
            // so its update does describe [k-1, k) and enters the prediction
            // immediately. It is driven by the monitor alone (no feedback
            // through the field), so no stability coupling arises.
            fwd_drift_update(est, meas.forward, u_prev, gains, opts, &diag);
            est.u_fwd_prev = meas.forward;
        } else {
            diag.skipped_fwd = true;
        }
        if (meas.has_reflected) {
            detuning_update(est, meas.reflected, gains, params, opts, &diag);
        } else {
            diag.skipped_detuning = true;
        }
    }

    EstimatorState pred_view = est;
    pred_view.delta_omega_hat = delta_omega_pred;
    const Phasor x_pred = eso_predict(pred_view, u_prev, params);
    diag.x_pred = x_pred;

    Phasor y_aligned = meas.pickup;
    if (variant == ObserverVariant::proposed) {
        rec_drift_update(est, meas.pickup, x_pred, gains, opts, &diag);
        y_aligned = rot_exact(-est.phi_rec_hat) * meas.pickup;
    } else {
        diag.skipped_rec = true;
    }

    const Phasor r = eso_innovation(y_aligned, x_pred);
    eso_update(est, x_pred, r, gains);
    est.u_prev = u_prev;

    diag.innovation = r;
    diag.innovation_norm = r.norm();
    return diag;
}

}  // namespace llrf
