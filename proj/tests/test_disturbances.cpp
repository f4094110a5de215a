#include <doctest.h>

#include <cmath>
#include <vector>

#include "llrf/cavity.hpp"
#include "llrf/disturbances.hpp"
#include "llrf/phasor.hpp"

using namespace llrf;

namespace {

constexpr double kTs = 1e-6;

DetuningProfileConfig zero_detuning() {
    DetuningProfileConfig c;
    c.n_sinusoids_min = 2;
    c.n_sinusoids_max = 4;
    c.thermal_tau = 0.2;
    return c;  // all amplitudes zero
}

const DriftStreams kFwdStreams{Stream::fwd_init, Stream::fwd_walk, Stream::fwd_periodic};

}  // namespace

TEST_CASE("zero config produces the zero trajectory") {
    const TrialSeed seed{77, 0};
    const auto det = gen_detuning(seed, zero_detuning(), 1000, kTs);
    for (double v : det) CHECK(v == 0.0);

    const auto drift = gen_phase_drift(seed, {}, 1000, kTs, kFwdStreams);
    for (double v : drift) CHECK(v == 0.0);

    const auto [di, dq] = gen_additive_disturbance(seed, {}, 500, kTs);
    for (double v : di) CHECK(v == 0.0);
    for (double v : dq) CHECK(v == 0.0);
}

TEST_CASE("single sinusoid is a pure tone of the configured frequency") {
    DetuningProfileConfig cfg = zero_detuning();
    cfg.n_sinusoids_min = cfg.n_sinusoids_max = 1;
    cfg.sinusoid_amp_range = kTwoPi * 100.0;
    cfg.sinusoid_freq_min = cfg.sinusoid_freq_max = 1000.0;

    const auto v = gen_detuning(TrialSeed{5, 3}, cfg, 1000, kTs);
    const double w = kTwoPi * 1000.0 * kTs;
    // any sampled sinusoid satisfies v[k-1] + v[k+1] = 2 cos(w) v[k]
    const double c2 = 2.0 * std::cos(w);
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        CHECK(v[k - 1] + v[k + 1] == doctest::Approx(c2 * v[k]).epsilon(1e-9));
    }
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::fabs(x));
    CHECK(peak > 0.0);
    CHECK(peak <= cfg.sinusoid_amp_range * (1.0 + 1e-12));
}

TEST_CASE("determinism and trial independence") {
    DetuningProfileConfig cfg = zero_detuning();
    cfg.bias_range = kTwoPi * 200.0;
    cfg.sinusoid_amp_range = kTwoPi * 100.0;
    cfg.sinusoid_freq_min = 60.0;
    cfg.sinusoid_freq_max = 2000.0;
    cfg.wander_std = kTwoPi * 0.5;
    cfg.thermal_amp = kTwoPi * 50.0;

    const auto a = gen_detuning(TrialSeed{123, 9}, cfg, 1000, kTs);
    const auto b = gen_detuning(TrialSeed{123, 9}, cfg, 1000, kTs);
    CHECK(a == b);  // bit-identical

    const auto c = gen_detuning(TrialSeed{123, 10}, cfg, 1000, kTs);
    CHECK(a != c);

    PhaseDriftProfileConfig dist;
    dist.init_range = 100.0;
    dist.walk_std = 2.0;
    dist.periodic_amp = 50.0;
    dist.periodic_freq_min = 60.0;
    dist.periodic_freq_max = 300.0;
    const auto d1 = gen_additive_disturbance(TrialSeed{123, 9}, dist, 500, kTs);
    const auto d2 = gen_additive_disturbance(TrialSeed{123, 9}, dist, 500, kTs);
    CHECK(d1.first == d2.first);
    CHECK(d1.second == d2.second);
    CHECK(d1.first != d1.second);  // independent component streams
}

TEST_CASE("ensemble independence across seeds") {
    DetuningProfileConfig cfg = zero_detuning();
    cfg.bias_range = kTwoPi * 200.0;
    cfg.sinusoid_amp_range = kTwoPi * 100.0;
    cfg.sinusoid_freq_min = 60.0;
    cfg.sinusoid_freq_max = 2000.0;
    cfg.wander_std = kTwoPi * 0.5;
    cfg.thermal_amp = kTwoPi * 50.0;

    // Correlation across the ensemble between paired distinct-seed trials,
    // evaluated at the final step of 1000.
    const int pairs = 2000;
    std::vector<double> xs, ys;
    xs.reserve(pairs);
    ys.reserve(pairs);
    for (int i = 0; i < pairs; ++i) {
        const auto x = gen_detuning(TrialSeed{99, static_cast<std::uint64_t>(2 * i)},
                                    cfg, 1000, kTs);
        const auto y = gen_detuning(TrialSeed{99, static_cast<std::uint64_t>(2 * i + 1)},
                                    cfg, 1000, kTs);
        xs.push_back(x.back());
        ys.push_back(y.back());
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < pairs; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= pairs;
    my /= pairs;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < pairs; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::fabs(corr) < 0.05);
}

TEST_CASE("detuning components compose additively under shared sub-streams") {
    DetuningProfileConfig full = zero_detuning();
    full.bias_range = kTwoPi * 200.0;
    full.sinusoid_amp_range = kTwoPi * 100.0;
    full.sinusoid_freq_min = 60.0;
    full.sinusoid_freq_max = 2000.0;
    full.wander_std = kTwoPi * 0.5;
    full.thermal_amp = kTwoPi * 50.0;

    DetuningProfileConfig bias_only = zero_detuning();
    bias_only.bias_range = full.bias_range;
    DetuningProfileConfig sines_only = zero_detuning();
    sines_only.sinusoid_amp_range = full.sinusoid_amp_range;
    sines_only.sinusoid_freq_min = full.sinusoid_freq_min;
    sines_only.sinusoid_freq_max = full.sinusoid_freq_max;
    DetuningProfileConfig walk_only = zero_detuning();
    walk_only.wander_std = full.wander_std;
    DetuningProfileConfig thermal_only = zero_detuning();
    thermal_only.thermal_amp = full.thermal_amp;

    const TrialSeed seed{2024, 17};
    const int n = 500;
    const auto all = gen_detuning(seed, full, n, kTs);
    const auto b = gen_detuning(seed, bias_only, n, kTs);
    const auto s = gen_detuning(seed, sines_only, n, kTs);
    const auto w = gen_detuning(seed, walk_only, n, kTs);
    const auto t = gen_detuning(seed, thermal_only, n, kTs);
    for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        CHECK(all[idx] ==
              doctest::Approx(b[idx] + s[idx] + w[idx] + t[idx]).epsilon(1e-9));
    }
}

TEST_CASE("phase drift: constant when only the initial offset is enabled") {
    PhaseDriftProfileConfig cfg;
    cfg.init_range = 0.05;
    const auto v = gen_phase_drift(TrialSeed{1, 1}, cfg, 200, kTs, kFwdStreams);
    for (double x : v) CHECK(x == v[0]);
    CHECK(std::fabs(v[0]) <= 0.05);
}

TEST_CASE("phase drift: walk increment statistics") {
    PhaseDriftProfileConfig cfg;
    cfg.walk_std = 1.0;
    const int n = 100000;
    const auto v = gen_phase_drift(TrialSeed{55, 0}, cfg, n, kTs, kFwdStreams);
    double sum_sq = 0.0;
    double prev = 0.0;
    for (double x : v) {
        const double inc = x - prev;
        sum_sq += inc * inc;
        prev = x;
    }
    const double std_hat = std::sqrt(sum_sq / n);
    CHECK(std::fabs(std_hat - cfg.walk_std) < 0.05 * cfg.walk_std);
}

TEST_CASE("constant disturbance bias drives the documented plant offset") {
    PhaseDriftProfileConfig cfg;
    cfg.init_range = 5000.0;  // volts/s, drawn constant per trial
    const int n = 3000;
    const auto [di, dq] = gen_additive_disturbance(TrialSeed{8, 4}, cfg, n, kTs);
    for (int k = 1; k < n; ++k) {
        CHECK(di[static_cast<std::size_t>(k)] == di[0]);
        CHECK(dq[static_cast<std::size_t>(k)] == dq[0]);
    }

    const CavityParams p = CavityParams::make(kTwoPi * 805e6, 1.61e4, kTs);
    TruthState st;
    st.d = {di[0], dq[0]};
    for (int k = 0; k < n; ++k) {
        st.x = step_truth(st, {0.0, 0.0}, p);
    }
    // geometric series: x_ss = ts*d / (1 - a), a = 1 - ts*omega_half
    const double a = 1.0 - p.ts * p.omega_half;
    CHECK(st.x.i == doctest::Approx(p.ts * di[0] / (1.0 - a)).epsilon(1e-9));
    CHECK(st.x.q == doctest::Approx(p.ts * dq[0] / (1.0 - a)).epsilon(1e-9));
}

TEST_CASE("config validation rejects bad ranges") {
    DetuningProfileConfig cfg = zero_detuning();
    cfg.sinusoid_freq_min = 100.0;
    cfg.sinusoid_freq_max = 60.0;
    CHECK_THROWS_AS(cfg.validate(kTs), std::invalid_argument);

    DetuningProfileConfig nyq = zero_detuning();
    nyq.sinusoid_freq_max = 6e5;  // above 1/(2 ts)
    CHECK_THROWS_AS(nyq.validate(kTs), std::invalid_argument);

    PhaseDriftProfileConfig pd;
    pd.walk_std = -1.0;
    CHECK_THROWS_AS(pd.validate(kTs), std::invalid_argument);

    CHECK_THROWS_AS(gen_detuning(TrialSeed{1, 1}, zero_detuning(), 0, kTs),
                    std::invalid_argument);
}
