#include "llrf/validate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "llrf/cavity.hpp"
#include "llrf/controller.hpp"
#include "llrf/observers.hpp"
#include "llrf/rng.hpp"

namespace llrf {

namespace {

using Cplx = std::complex<double>;

Cplx to_cplx(const Phasor& p) { return {p.i, p.q}; }

/// Exact ZOH step of dx/dt = m x + c over dt, m = -omega_half + i*delta_omega.
Cplx exact_step(Cplx x, Cplx m, Cplx c, double dt) {
    const Cplx e = std::exp(m * dt);
    return e * x + (e - 1.0) / m * c;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

PropertyResult rotation_identities() {
    PropertyResult res{"rotation_identities", true, ""};
    RngStream rng(12345);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-kPi, kPi);
        const double b = rng.uniform(-kPi, kPi);
        const Mat2 lhs = rot_exact(a) * rot_exact(b);
        const Mat2 rhs = rot_exact(a + b);
        worst = std::max(worst, (lhs - rhs).frobenius());
        worst = std::max(worst,
                         (rot_exact(a).transpose() - rot_exact(-a)).frobenius());
        const Phasor z{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (z.norm() > 1e-6) {
            const double want = wrap_angle(angle(z) + a);
            const double got = angle(rot_exact(a) * z);
            worst = std::max(worst, std::fabs(wrap_angle(got - want)));
        }
    }
    const Mat2 jj = Mat2::j() * Mat2::j();
    const Mat2 neg_i = -1.0 * Mat2::identity();
    if ((jj - neg_i).frobenius() != 0.0) {
        res.pass = false;
        res.detail = "J*J != -I";
        return res;
    }
    res.pass = worst <= 1e-12;
    res.detail = "max deviation " + fmt(worst) + " (tol 1e-12)";
    return res;
}

PropertyResult small_angle_bound() {
    PropertyResult res{"small_angle_bound", true, ""};
    double worst_ratio = 0.0;
    for (int i = -100; i <= 100; ++i) {
        const double theta = 0.001 * i;  // up to +-0.1 rad
        if (theta == 0.0) continue;
        const double gap = (rot_small(theta) - rot_exact(theta)).frobenius();
        worst_ratio = std::max(worst_ratio, gap / (theta * theta));
    }
    res.pass = worst_ratio <= 1.0;
    res.detail = "max ||R_small-R||_F / theta^2 = " + fmt(worst_ratio) + " (tol 1)";
    return res;
}

/// Time-averaged Euler-vs-exact gap, normalized by the peak exact magnitude,
/// over the configured pulse at constant inputs.
double euler_error(const CavityParams& params, double delta_omega, double phi_fwd,
                   const Phasor& u, const Phasor& d, int n_steps) {
    TruthState truth;
    truth.delta_omega = delta_omega;
    truth.phi_fwd = phi_fwd;
    truth.d = d;

    const Cplx m{-params.omega_half, delta_omega};
    const Cplx c = params.omega_half * std::exp(Cplx(0.0, phi_fwd)) * to_cplx(u) +
                   to_cplx(d);

    Cplx x_exact = 0.0;
    double gap_sum = 0.0;
    double peak = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        truth.x = step_truth(truth, u, params);
        x_exact = exact_step(x_exact, m, c, params.ts);
        gap_sum += std::abs(to_cplx(truth.x) - x_exact);
        peak = std::max(peak, std::abs(x_exact));
    }
    return (gap_sum / n_steps) / peak;
}

PropertyResult euler_vs_exponential(const RunConfig& config) {
    PropertyResult res{"euler_vs_exponential", true, ""};
    const double ts = config.cavity_ts;
    const int n = static_cast<int>(std::llround(config.macropulse_horizon / ts));
    const CavityParams coarse = CavityParams::make(config.cavity_omega0,
                                                   config.cavity_q_loaded, ts,
                                                   config.cavity_small_angle);
    const CavityParams fine = CavityParams::make(config.cavity_omega0,
                                                 config.cavity_q_loaded, ts / 2.0,
                                                 config.cavity_small_angle);
    const double delta_omega = kTwoPi * 500.0;
    const double phi_fwd = 0.01;
    const Phasor u{1.0, 0.0};
    const Phasor d{50.0, -20.0};
    const double err = euler_error(coarse, delta_omega, phi_fwd, u, d, n);
    const double err_half = euler_error(fine, delta_omega, phi_fwd, u, d, 2 * n);
    const double ratio = err / err_half;
    // first-order method: the error bound scales linearly with ts
    const double bound = 1e-3 * (ts / 1e-6);
    res.pass = err <= bound && ratio >= 1.8;
    res.detail = "avg rel error " + fmt(err) + " at ts=" + fmt(ts) + " (bound " +
                 fmt(bound) + "), halving ts shrinks it x" + fmt(ratio) +
                 " (need >= 1.8)";
    return res;
}

PropertyResult noise_free_exactness(const RunConfig& config) {
    PropertyResult res{"noise_free_exactness", true, ""};
    RunConfig quiet = config;
    quiet.noise_sigma_pickup = quiet.noise_sigma_reflected = 0.0;
    quiet.noise_sigma_reference = quiet.noise_sigma_forward = 0.0;
    quiet.detuning_bias_range = quiet.detuning_sinusoid_amp_range = 0.0;
    quiet.detuning_wander_std = quiet.detuning_thermal_amp = 0.0;
    quiet.drift_fwd_init_range = quiet.drift_fwd_walk_std = 0.0;
    quiet.drift_fwd_periodic_amp = 0.0;
    quiet.drift_rec_init_range = quiet.drift_rec_walk_std = 0.0;
    quiet.drift_rec_periodic_amp = 0.0;
    quiet.disturbance_init_range = quiet.disturbance_walk_std = 0.0;
    quiet.disturbance_periodic_amp = 0.0;
    const ScenarioConfig scenario = quiet.to_scenario();
    const MetricWindow window = flattop_window(scenario.pulse);

    double worst = 0.0;
    for (const ObserverVariant variant :
         {ObserverVariant::proposed, ObserverVariant::standard}) {
        const TrialRecord rec = run_trial(quiet.mc_base_seed, 0, scenario, variant);
        if (rec.aborted) {
            res.pass = false;
            res.detail = "trial aborted at step " + std::to_string(rec.abort_step);
            return res;
        }
        for (int k = window.begin; k < window.end; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            worst = std::max(worst, (rec.x[idx] - rec.ref[idx]).norm());
        }
    }
    res.pass = worst <= 1e-9;
    res.detail = "max flattop tracking error " + fmt(worst) + " (tol 1e-9)";
    return res;
}

PropertyResult descent_sign(const RunConfig& config, bool flip) {
    PropertyResult res{"detuning_descent_sign", true, ""};
    const double omega_half = config.omega_half();
    RngStream rng(987654321);
    int agreed = 0;
    const int points = 20;
    for (int i = 0; i < points; ++i) {
        const double kappa = rng.uniform(50.0, 400.0);
        const double delta_true = kTwoPi * rng.uniform(-3000.0, 3000.0);
        const double delta_hat = kTwoPi * rng.uniform(-3000.0, 3000.0);
        const double mag = rng.uniform(0.2, 2.0);
        const double ang = rng.uniform(-kPi, kPi);
        const Phasor u_fwd{mag * std::cos(ang), mag * std::sin(ang)};

        // Noise-free steady-state reflected sample at the true detuning.
        const Phasor u_refl = predict_reflected(u_fwd, delta_true, kappa, omega_half);
        auto objective = [&](double dh) {
            const Phasor r = u_refl - predict_reflected(u_fwd, dh, kappa, omega_half);
            return r.norm_sq();
        };
        const double h = kTwoPi * 1.0;
        const double fd = (objective(delta_hat + h) - objective(delta_hat - h)) / (2.0 * h);

        const Phasor r = u_refl - predict_reflected(u_fwd, delta_hat, kappa, omega_half);
        const double sign = flip ? -kDetuningDescentSign : kDetuningDescentSign;
        const double step = sign * (omega_half / kappa) *
                            dot(r, Mat2::j() * u_fwd) / u_fwd.norm_sq();
        if (std::fabs(fd) < 1e-12 || step * fd < 0.0) ++agreed;
    }
    res.pass = agreed == points;
    res.detail = std::to_string(agreed) + "/" + std::to_string(points) +
                 " operating points descend" + (flip ? " (sign flipped)" : "");
    return res;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(const RunConfig& config,
                                               bool flip_descent_sign) {
    std::vector<PropertyResult> results;
    results.push_back(rotation_identities());
    results.push_back(small_angle_bound());
    results.push_back(euler_vs_exponential(config));
    results.push_back(noise_free_exactness(config));
    results.push_back(descent_sign(config, flip_descent_sign));
    return results;
}

}  // namespace llrf
