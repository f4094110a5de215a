#pragma once
/**
 * @file rng.hpp
 * @brief Deterministic, splittable random streams for Monte Carlo trials.
 *
 * Every stochastic ingredient of a trial (each truth-process component, each
 * noise channel) draws from its own stream, seeded by mixing
 * (base_seed, trial_index, stream id) through splitmix64. Consequences:
 *   - a (seed, config) pair reproduces a trial bit-exactly,
 *   - enabling or disabling one component never perturbs another's draws,
 *   - both observer variants replay identical truth and noise per trial.
 *
 * Uniform and normal variates are generated from raw mt19937_64 output
 * (53-bit mantissa scaling, Box-Muller) rather than <random> distributions,
 * whose sequences are implementation-defined.
 */

#include <cstdint>
#include <random>

namespace llrf {

/// Stable stream identifiers; values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    detuning_bias = 0,
    detuning_sines = 1,
    detuning_walk = 2,
    detuning_thermal = 3,
    fwd_init = 4,
    fwd_walk = 5,
    fwd_periodic = 6,
    rec_init = 7,
    rec_walk = 8,
    rec_periodic = 9,
    dist_i_init = 10,
    dist_i_walk = 11,
    dist_i_periodic = 12,
    dist_q_init = 13,
    dist_q_walk = 14,
    dist_q_periodic = 15,
    noise_pickup = 16,
    noise_reflected = 17,
    noise_forward = 18,
    noise_reference = 19,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for one stream: splitmix64 chain over base, trial and stream id.
std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t trial_index,
                                 Stream stream);

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (second value cached).
    double normal();
    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi);

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Handle from which a trial's component streams are split.
struct TrialSeed {
    std::uint64_t base = 0;
    std::uint64_t trial = 0;

    RngStream stream(Stream s) const {
        return RngStream(derive_stream_seed(base, trial, s));
    }
};

}  // namespace llrf
