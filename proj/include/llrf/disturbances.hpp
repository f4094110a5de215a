#pragma once
/**
 * @file disturbances.hpp
 * @brief Seeded truth-trajectory generators for the Monte Carlo study.
 *
 * Detuning is a composite of a random bias, a few sinusoids with randomized
 * amplitude/frequency/phase, a Gaussian random walk, and a thermally lagged
 * component (stationary AR(1) with time constant thermal_tau). Forward and
 * receiver phase drifts, and each additive-disturbance component, share a
 * simpler family: random initial offset + walk + one random-phase sinusoid.
 *
 * Every component draws from its own stream (see rng.hpp), so the processes
 * compose additively: summing trajectories generated with one component
 * enabled at a time equals generating with all components enabled.
 */

#include <cstdint>
#include <utility>
#include <vector>

#include "llrf/rng.hpp"

namespace llrf {

using DriftTrajectory = std::vector<double>;

struct DetuningProfileConfig {
    double bias_range = 0.0;          ///< uniform bias in +-bias_range, rad/s
    int n_sinusoids_min = 0;          ///< inclusive count range
    int n_sinusoids_max = 0;
    double sinusoid_amp_range = 0.0;  ///< amplitudes uniform in (0, range], rad/s
    double sinusoid_freq_min = 0.0;   ///< Hz
    double sinusoid_freq_max = 0.0;   ///< Hz
    double wander_std = 0.0;          ///< random-walk increment std, rad/s per sqrt(step)
    double thermal_amp = 0.0;         ///< stationary std of the thermal term, rad/s
    double thermal_tau = 1.0;         ///< thermal lag time constant, s

    /// @throws std::invalid_argument on negative ranges, inverted bounds, or
    ///         frequencies at/above the Nyquist rate 1/(2*ts).
    void validate(double ts) const;
};

struct PhaseDriftProfileConfig {
    double init_range = 0.0;      ///< uniform initial offset in +-init_range
    double walk_std = 0.0;        ///< per-step walk increment std
    double periodic_amp = 0.0;    ///< sinusoid amplitude
    double periodic_freq_min = 0.0;  ///< Hz, frequency drawn uniformly per trial
    double periodic_freq_max = 0.0;  ///< Hz

    void validate(double ts) const;
};

/// Streams used by one phase-drift-family process.
struct DriftStreams {
    Stream init;
    Stream walk;
    Stream periodic;
};

/// Composite detuning trajectory, one sample per control step.
DriftTrajectory gen_detuning(const TrialSeed& seed, const DetuningProfileConfig& cfg,
                             int n_steps, double ts);

/// Phase-drift-family trajectory (also used for disturbance components).
/// Values are stored unwrapped; consumers wrap at use.
DriftTrajectory gen_phase_drift(const TrialSeed& seed, const PhaseDriftProfileConfig& cfg,
                                int n_steps, double ts, const DriftStreams& streams);

/// Additive-disturbance I and Q component trajectories, volts/s.
std::pair<DriftTrajectory, DriftTrajectory> gen_additive_disturbance(
    const TrialSeed& seed, const PhaseDriftProfileConfig& cfg, int n_steps, double ts);

}  // namespace llrf
