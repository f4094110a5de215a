#pragma once
/**
 * @file harness.hpp
 * @brief Single-trial and Monte Carlo orchestration.
 *
 * A trial walks the macropulse step by step: propagate the truth plant under
 * the previous command, synthesize noisy measurements, run the observer, run
 * the controller, log everything. Trials are deterministic in
 * (base_seed, trial_index, config); both observer variants replay identical
 * truth and noise per trial (paired comparison).
 *
 * Timing convention (zero-order hold): propagation from k to k+1 uses drift
 * values at index k; the pickup at step k sees phi_rec[k]; the forward and
 * reflected monitors consumed at step k describe the elapsed interval
 * [k-1, k) and therefore use phi_fwd[k-1] with command u_{k-1}. No drive
 * interval precedes k = 0, so those monitors are absent on the first step.
 */

#include <cstdint>
#include <optional>
#include <vector>

#include "llrf/cavity.hpp"
#include "llrf/controller.hpp"
#include "llrf/disturbances.hpp"
#include "llrf/observers.hpp"
#include "llrf/phasor.hpp"
#include "llrf/rng.hpp"

namespace llrf {

struct MacropulseConfig {
    double ts = 1e-6;
    double fill_duration = 325e-6;
    double flattop_end = 950e-6;
    double horizon = 1e-3;
    double flattop_amplitude = 1.0;
    double flattop_phase = 0.0;
    /// Hold the flattop reference through the end of the horizon (default);
    /// false drops the reference to zero after flattop_end.
    bool hold_tail = true;

    int n_steps() const;
    /// @throws std::invalid_argument on bad ordering or non-integer step count.
    void validate() const;
};

/// Reference samples (x*_k, x*_{k+1}); k must lie within the horizon.
std::pair<Phasor, Phasor> reference_trajectory(const MacropulseConfig& cfg, int k);

/// Per-trial truth trajectories, one sample per step.
struct TruthProfiles {
    DriftTrajectory detuning;  ///< rad/s
    DriftTrajectory phi_fwd;   ///< rad
    DriftTrajectory phi_rec;   ///< rad
    DriftTrajectory dist_i;    ///< volts/s
    DriftTrajectory dist_q;    ///< volts/s
};

struct StochasticConfig {
    DetuningProfileConfig detuning;
    PhaseDriftProfileConfig drift_fwd;
    PhaseDriftProfileConfig drift_rec;
    PhaseDriftProfileConfig disturbance;  ///< per IQ component, volts/s
    ChannelNoise noise;
};

TruthProfiles synthesize_profiles(const TrialSeed& seed, const StochasticConfig& cfg,
                                  int n_steps, double ts);

/// Everything one trial needs.
struct ScenarioConfig {
    CavityParams cavity;
    MacropulseConfig pulse;
    StochasticConfig stochastic;
    ObserverGains gains_proposed = ObserverGains::proposed_defaults();
    ObserverGains gains_standard = ObserverGains::standard_defaults();
    ObserverOptions observer_opts;
    ControlWeights weights;
    double kappa_truth = 200.0;  ///< coupling used by the truth reflected channel
    double u_max = 0.0;          ///< command saturation hook, 0 = unbounded

    const ObserverGains& gains_for(ObserverVariant v) const {
        return v == ObserverVariant::proposed ? gains_proposed : gains_standard;
    }
};

/// Full per-step trace of one realization (parallel arrays).
struct TrialRecord {
    int n_steps = 0;
    double ts = 0.0;

    std::vector<Phasor> ref;       ///< true reference x*_k
    std::vector<Phasor> x;         ///< truth field
    std::vector<double> phi_fwd, phi_rec, delta_omega;
    std::vector<Phasor> d;         ///< truth disturbance rate, volts/s
    std::vector<Phasor> x_hat, d_hat;
    std::vector<double> phi_fwd_hat, phi_rec_hat, delta_omega_hat;
    std::vector<Phasor> y, u_fwd_meas, u_refl_meas;
    std::vector<Phasor> u_ff, u_fb, u;
    std::vector<double> innovation_norm;
    std::vector<std::uint8_t> skip_flags;  ///< bit0 fwd, bit1 detuning, bit2 rec
    std::vector<double> e_amp, e_phase;
    std::vector<std::uint8_t> phase_valid;
    std::vector<double> err_fwd, err_rec, err_det;  ///< estimate - truth (angles wrapped)

    bool aborted = false;
    int abort_step = -1;
};

/// Run one realization. Pass profiles to replay fixed truth trajectories
/// (criteria scenarios); nullptr synthesizes them from the trial seed.
TrialRecord run_trial(std::uint64_t base_seed, std::uint64_t trial_index,
                      const ScenarioConfig& scenario, ObserverVariant variant,
                      const TruthProfiles* profiles = nullptr);

/// Regulation error series. Phase samples are masked (phase_valid = 0) where
/// the reference amplitude is zero or the field magnitude is below eps_u.
struct ErrorSeries {
    std::vector<double> e_amp;
    std::vector<double> e_phase;
    std::vector<std::uint8_t> phase_valid;
};
ErrorSeries amplitude_phase_errors(const TrialRecord& record, double eps_u = 1e-6);

/// Half-open step range [begin, end).
struct MetricWindow {
    int begin = 0;
    int end = 0;
};
MetricWindow flattop_window(const MacropulseConfig& cfg);
MetricWindow full_window(const MacropulseConfig& cfg);

enum class MetricChannel { amplitude = 0, phase, fwd, rec, detuning };
inline constexpr int kNumChannels = 5;

/// Time-averaged absolute errors over a window, one scalar per channel.
struct TrialScores {
    double amplitude = 0.0;
    double phase = 0.0;
    double fwd = 0.0;
    double rec = 0.0;
    double detuning = 0.0;

    double operator[](MetricChannel c) const;
};
TrialScores trial_scores(const TrialRecord& record, const MetricWindow& window);

/// Per-channel time-averaged |estimate - truth| (the false-localization scores).
struct LocalizationScores {
    double fwd = 0.0;
    double rec = 0.0;
    double detuning = 0.0;
};
LocalizationScores false_localization_scores(const TrialRecord& record,
                                             const MetricWindow& window);

/// Fraction of trials whose score exceeds each threshold.
/// @throws std::invalid_argument on an empty trial set.
std::vector<double> exceedance_likelihood(const std::vector<double>& per_trial_scores,
                                          const std::vector<double>& thresholds);

/// Log-spaced threshold grid, endpoints inclusive.
struct ThresholdGrid {
    double min = 0.0;
    double max = 0.0;
    int count = 0;
    std::vector<double> values() const;
};

struct ThresholdGrids {
    ThresholdGrid amplitude{1e-5, 1e-1, 41};
    ThresholdGrid phase{1e-5, 1e-1, 41};
    ThresholdGrid detuning{kTwoPi * 1e-1, kTwoPi * 1e4, 51};

    const ThresholdGrid& for_channel(MetricChannel c) const;
};

/// Aggregation mode: threshold the per-trial time-averaged score (default),
/// or average each trial's per-sample exceedance fraction.
enum class MetricMode { time_average, per_sample };

enum class Window { flattop = 0, full = 1 };
inline constexpr int kNumWindows = 2;

struct Curve {
    std::vector<double> thresholds;
    std::vector<double> likelihood;
};

struct EnsembleResult {
    ObserverVariant variant = ObserverVariant::proposed;
    int n_trials = 0;
    std::uint64_t base_seed = 0;
    int abort_count = 0;
    Curve curves[kNumWindows][kNumChannels];
    /// Per-trial time-averaged scores (aborted trials excluded), kept for
    /// analysis and tests.
    std::vector<double> scores[kNumWindows][kNumChannels];
};

struct McRequest {
    int n_trials = 0;
    std::uint64_t base_seed = 0;
    bool run_proposed = true;
    bool run_standard = true;
    ThresholdGrids grids;
    MetricMode mode = MetricMode::time_average;
    int n_threads = 0;  ///< <= 0 picks hardware concurrency
};

struct McResult {
    std::optional<EnsembleResult> proposed;
    std::optional<EnsembleResult> standard;
};

/// Paired Monte Carlo over both requested variants. Aggregation is a
/// deterministic reduction in trial-index order, independent of scheduling.
McResult run_monte_carlo(const ScenarioConfig& scenario, const McRequest& request);

}  // namespace llrf
