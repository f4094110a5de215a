#pragma once
/**
 * @file config.hpp
 * @brief Run configuration: defaults, the line-oriented config-file format,
 *        validation, and the canonical serialization used for run manifests
 *        and output-file hashes.
 *
 * File format: one `section.key = value` per line, `#` starts a comment,
 * blank lines ignored. Unknown keys are rejected; missing keys keep their
 * defaults (the published operating point of an 805 MHz side-coupled cavity
 * station and the two observer gain sets).
 */

#include <cstdint>
#include <string>

#include "llrf/harness.hpp"

namespace llrf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // cavity
    double cavity_omega0 = kTwoPi * 805e6;
    double cavity_q_loaded = 1.61e4;
    double cavity_ts = 1e-6;
    bool cavity_small_angle = false;

    // macropulse
    double macropulse_fill_duration = 325e-6;
    double macropulse_flattop_end = 950e-6;
    double macropulse_horizon = 1e-3;
    double macropulse_flattop_amplitude = 1.0;
    double macropulse_flattop_phase = 0.0;
    bool macropulse_hold_tail = true;

    // measurement noise (per IQ component)
    double noise_sigma_pickup = 1e-4;
    double noise_sigma_reflected = 1e-4;
    double noise_sigma_reference = 1e-4;
    double noise_sigma_forward = 1e-4;

    // detuning truth process
    double detuning_bias_range = kTwoPi * 200.0;
    int detuning_n_sinusoids_min = 2;
    int detuning_n_sinusoids_max = 4;
    double detuning_sinusoid_amp_range = kTwoPi * 100.0;
    double detuning_sinusoid_freq_min = 60.0;
    double detuning_sinusoid_freq_max = 2000.0;
    double detuning_wander_std = kTwoPi * 0.5;
    double detuning_thermal_amp = kTwoPi * 50.0;
    double detuning_thermal_tau = 0.2;

    // forward / receiver phase drift truth processes
    double drift_fwd_init_range = 0.020;
    double drift_fwd_walk_std = 5e-6;
    double drift_fwd_periodic_amp = 0.002;
    double drift_fwd_periodic_freq_min = 60.0;
    double drift_fwd_periodic_freq_max = 300.0;
    double drift_rec_init_range = 0.020;
    double drift_rec_walk_std = 5e-6;
    double drift_rec_periodic_amp = 0.002;
    double drift_rec_periodic_freq_min = 60.0;
    double drift_rec_periodic_freq_max = 300.0;

    // additive disturbance truth process (volts/s per component)
    double disturbance_init_range = 31.41592653589793;
    double disturbance_walk_std = 1.0;
    double disturbance_periodic_amp = 15.707963267948966;
    double disturbance_periodic_freq_min = 60.0;
    double disturbance_periodic_freq_max = 300.0;

    // observer gains
    double observer_proposed_alpha_x = 0.1;
    double observer_proposed_alpha_d = 1e-4;
    double observer_proposed_alpha_omega = 1.0;
    double observer_proposed_alpha_fwd = 0.9754;
    double observer_proposed_alpha_rec = 0.7316;
    double observer_proposed_kappa = 200.0;
    double observer_standard_alpha_x = 0.1;
    double observer_standard_alpha_d = 0.3;
    double observer_standard_alpha_omega = 0.0;
    double observer_standard_alpha_fwd = 0.0;
    double observer_standard_alpha_rec = 0.0;
    double observer_standard_kappa = 200.0;

    // observer options
    double observer_eps_u = 1e-6;
    double observer_drive_floor = 1e-3;
    bool observer_literal_drift_integrator = false;

    // controller
    double control_q_weight = 0.1;
    double control_r_weight = 100.0;
    double control_u_max = 0.0;

    // Monte Carlo
    int mc_n_trials = 500;
    std::uint64_t mc_base_seed = 1;
    int mc_threads = 0;

    // metrics
    std::string metric_window = "flattop";       // flattop | full
    std::string metric_mode = "time_average";    // time_average | per_sample
    double metric_amplitude_threshold_min = 1e-5;
    double metric_amplitude_threshold_max = 1e-1;
    int metric_amplitude_threshold_count = 41;
    double metric_phase_threshold_min = 1e-5;
    double metric_phase_threshold_max = 1e-1;
    int metric_phase_threshold_count = 41;
    double metric_detuning_threshold_min = kTwoPi * 1e-1;
    double metric_detuning_threshold_max = kTwoPi * 1e4;
    int metric_detuning_threshold_count = 51;

    // output
    std::string output_dir = "out";

    /// Derived: loaded half-bandwidth omega0/(2*q_loaded).
    double omega_half() const { return cavity_omega0 / (2.0 * cavity_q_loaded); }

    /// @throws ConfigError naming the offending field.
    void validate() const;

    ScenarioConfig to_scenario() const;
    ThresholdGrids grids() const;
    MetricMode mode() const;
    Window headline_window() const;

    /// Fixed-order `key = value` dump of every result-affecting field.
    /// Execution details (mc.threads, output.dir) are excluded so that equal
    /// hashes always mean byte-identical outputs.
    std::string canonical_text() const;
    /// FNV-1a 64 over the canonical text; embedded in every output file.
    std::uint64_t hash() const;
};

/// Parse config text. `source` names the origin for error messages.
/// @throws ConfigError with line information on parse failure or unknown keys.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Load and validate a config file; an empty file yields pure defaults.
RunConfig load_config(const std::string& path);

}  // namespace llrf
