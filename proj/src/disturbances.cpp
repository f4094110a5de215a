#include "llrf/disturbances.hpp"

#include <cmath>
#include <stdexcept>

#include "llrf/phasor.hpp"

namespace llrf {

namespace {

void require(bool ok, const char* why) {
    if (!ok) throw std::invalid_argument(std::string("disturbance config: ") + why);
}

}  // namespace

void DetuningProfileConfig::validate(double ts) const {
    require(bias_range >= 0.0, "bias_range must be >= 0");
    require(n_sinusoids_min >= 0 && n_sinusoids_max >= n_sinusoids_min,
            "sinusoid count range invalid");
    require(sinusoid_amp_range >= 0.0, "sinusoid_amp_range must be >= 0");
    require(sinusoid_freq_min >= 0.0 && sinusoid_freq_max >= sinusoid_freq_min,
            "sinusoid frequency range invalid");
    require(sinusoid_freq_max < 0.5 / ts, "sinusoid frequency at/above Nyquist");
    require(wander_std >= 0.0, "wander_std must be >= 0");
    require(thermal_amp >= 0.0, "thermal_amp must be >= 0");
    require(thermal_tau > 0.0, "thermal_tau must be > 0");
}

void PhaseDriftProfileConfig::validate(double ts) const {
    require(init_range >= 0.0, "init_range must be >= 0");
    require(walk_std >= 0.0, "walk_std must be >= 0");
    require(periodic_amp >= 0.0, "periodic_amp must be >= 0");
    require(periodic_freq_min >= 0.0 && periodic_freq_max >= periodic_freq_min,
            "periodic frequency range invalid");
    require(periodic_freq_max < 0.5 / ts, "periodic frequency at/above Nyquist");
}

DriftTrajectory gen_detuning(const TrialSeed& seed, const DetuningProfileConfig& cfg,
                             int n_steps, double ts) {
    if (n_steps <= 0) throw std::invalid_argument("gen_detuning: n_steps must be > 0");
    cfg.validate(ts);
    DriftTrajectory values(static_cast<std::size_t>(n_steps), 0.0);

    {
        RngStream rng = seed.stream(Stream::detuning_bias);
        const double bias = rng.uniform(-cfg.bias_range, cfg.bias_range);
        for (auto& v : values) v += bias;
    }
    {
        RngStream rng = seed.stream(Stream::detuning_sines);
        const int n = rng.uniform_int(cfg.n_sinusoids_min, cfg.n_sinusoids_max);
        for (int s = 0; s < n; ++s) {
            // Amplitude in (0, range]: mirror the [0, 1) draw.
            const double amp = cfg.sinusoid_amp_range * (1.0 - rng.uniform());
            const double freq = rng.uniform(cfg.sinusoid_freq_min, cfg.sinusoid_freq_max);
            const double phase = rng.uniform(0.0, kTwoPi);
            const double w = kTwoPi * freq * ts;
            for (int k = 0; k < n_steps; ++k) {
                values[static_cast<std::size_t>(k)] += amp * std::sin(w * k + phase);
            }
        }
    }
    if (cfg.wander_std > 0.0) {
        RngStream rng = seed.stream(Stream::detuning_walk);
        double walk = 0.0;
        for (auto& v : values) {
            walk += cfg.wander_std * rng.normal();
            v += walk;
        }
    }
    if (cfg.thermal_amp > 0.0) {
        RngStream rng = seed.stream(Stream::detuning_thermal);
        // Stationary AR(1): std thermal_amp, time constant thermal_tau.
        const double rho = std::exp(-ts / cfg.thermal_tau);
        const double drive = cfg.thermal_amp * std::sqrt(1.0 - rho * rho);
        double th = cfg.thermal_amp * rng.normal();
        for (auto& v : values) {
            v += th;
            th = rho * th + drive * rng.normal();
        }
    }
    return values;
}

DriftTrajectory gen_phase_drift(const TrialSeed& seed, const PhaseDriftProfileConfig& cfg,
                                int n_steps, double ts, const DriftStreams& streams) {
    if (n_steps <= 0) throw std::invalid_argument("gen_phase_drift: n_steps must be > 0");
    cfg.validate(ts);
    DriftTrajectory values(static_cast<std::size_t>(n_steps), 0.0);

    {
        RngStream rng = seed.stream(streams.init);
        const double init = rng.uniform(-cfg.init_range, cfg.init_range);
        for (auto& v : values) v += init;
    }
    if (cfg.walk_std > 0.0) {
        RngStream rng = seed.stream(streams.walk);
        double walk = 0.0;
        for (auto& v : values) {
            walk += cfg.walk_std * rng.normal();
            v += walk;
        }
    }
    if (cfg.periodic_amp > 0.0) {
        RngStream rng = seed.stream(streams.periodic);
        const double freq = rng.uniform(cfg.periodic_freq_min, cfg.periodic_freq_max);
        const double phase = rng.uniform(0.0, kTwoPi);
        const double w = kTwoPi * freq * ts;
        for (int k = 0; k < n_steps; ++k) {
            values[static_cast<std::size_t>(k)] += cfg.periodic_amp * std::sin(w * k + phase);
        }
    }
    return values;
}

std::pair<DriftTrajectory, DriftTrajectory> gen_additive_disturbance(
    const TrialSeed& seed, const PhaseDriftProfileConfig& cfg, int n_steps, double ts) {
    DriftStreams si{Stream::dist_i_init, Stream::dist_i_walk, Stream::dist_i_periodic};
    DriftStreams sq{Stream::dist_q_init, Stream::dist_q_walk, Stream::dist_q_periodic};
    return {gen_phase_drift(seed, cfg, n_steps, ts, si),
            gen_phase_drift(seed, cfg, n_steps, ts, sq)};
}

}  // namespace llrf
