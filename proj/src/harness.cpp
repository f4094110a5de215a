#include "llrf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace llrf {

int MacropulseConfig::n_steps() const {
    return static_cast<int>(std::llround(horizon / ts));
}

void MacropulseConfig::validate() const {
    auto reject = [](const char* why) {
        throw std::invalid_argument(std::string("macropulse config: ") + why);
    };
    if (!(ts > 0.0)) reject("ts must be > 0");
    if (!(fill_duration > 0.0)) reject("fill_duration must be > 0");
    if (!(fill_duration < flattop_end)) reject("fill_duration must be < flattop_end");
    if (!(flattop_end <= horizon)) reject("flattop_end must be <= horizon");
    const double steps = horizon / ts;
    if (std::fabs(steps - std::llround(steps)) > 1e-9 * steps) {
        reject("horizon/ts must be an integer step count");
    }
    if (!(flattop_amplitude >= 0.0)) reject("flattop_amplitude must be >= 0");
}

namespace {

double reference_amplitude(const MacropulseConfig& cfg, double t) {
    if (t < 0.0) return 0.0;
    if (t < cfg.fill_duration) {
        return cfg.flattop_amplitude * (1.0 - std::exp(-5.0 * t / cfg.fill_duration));
    }
    const double end = cfg.hold_tail ? cfg.horizon : cfg.flattop_end;
    return t <= end ? cfg.flattop_amplitude : 0.0;
}

Phasor reference_sample(const MacropulseConfig& cfg, double t) {
    const double a = reference_amplitude(cfg, t);
    return {a * std::cos(cfg.flattop_phase), a * std::sin(cfg.flattop_phase)};
}

}  // namespace

std::pair<Phasor, Phasor> reference_trajectory(const MacropulseConfig& cfg, int k) {
    if (k < 0 || k >= cfg.n_steps()) {
        throw std::out_of_range("reference_trajectory: step outside horizon");
    }
    return {reference_sample(cfg, k * cfg.ts), reference_sample(cfg, (k + 1) * cfg.ts)};
}

TruthProfiles synthesize_profiles(const TrialSeed& seed, const StochasticConfig& cfg,
                                  int n_steps, double ts) {
    TruthProfiles p;
    p.detuning = gen_detuning(seed, cfg.detuning, n_steps, ts);
    p.phi_fwd = gen_phase_drift(seed, cfg.drift_fwd, n_steps, ts,
                                {Stream::fwd_init, Stream::fwd_walk, Stream::fwd_periodic});
    p.phi_rec = gen_phase_drift(seed, cfg.drift_rec, n_steps, ts,
                                {Stream::rec_init, Stream::rec_walk, Stream::rec_periodic});
    auto [di, dq] = gen_additive_disturbance(seed, cfg.disturbance, n_steps, ts);
    p.dist_i = std::move(di);
    p.dist_q = std::move(dq);
    return p;
}

namespace {

bool finite_step(const Phasor& x, const DriveCommand& cmd, const EstimatorState& est) {
    return x.finite() && cmd.u_total.finite() && est.x_hat.finite() &&
           est.d_hat.finite() && std::isfinite(est.phi_fwd_hat) &&
           std::isfinite(est.phi_rec_hat) && std::isfinite(est.delta_omega_hat);
}

}  // namespace

TrialRecord run_trial(std::uint64_t base_seed, std::uint64_t trial_index,
                      const ScenarioConfig& scenario, ObserverVariant variant,
                      const TruthProfiles* profiles) {
    const MacropulseConfig& pulse = scenario.pulse;
    pulse.validate();
    const int n = pulse.n_steps();
    const double ts = pulse.ts;
    const TrialSeed seed{base_seed, trial_index};

    TruthProfiles local;
    if (profiles == nullptr) {
        local = synthesize_profiles(seed, scenario.stochastic, n, ts);
        profiles = &local;
    }

    RngStream rng_pickup = seed.stream(Stream::noise_pickup);
    RngStream rng_reflected = seed.stream(Stream::noise_reflected);
    RngStream rng_forward = seed.stream(Stream::noise_forward);
    RngStream rng_reference = seed.stream(Stream::noise_reference);
    const ChannelNoise& noise = scenario.stochastic.noise;

    const ObserverGains& gains = scenario.gains_for(variant);
    gains.validate();
    scenario.weights.validate();

    TrialRecord rec;
    rec.n_steps = n;
    rec.ts = ts;
    auto reserve = [n](auto& v) { v.reserve(static_cast<std::size_t>(n)); };
    reserve(rec.ref);
    reserve(rec.x);
    reserve(rec.phi_fwd);
    reserve(rec.phi_rec);
    reserve(rec.delta_omega);
    reserve(rec.d);
    reserve(rec.x_hat);
    reserve(rec.d_hat);
    reserve(rec.phi_fwd_hat);
    reserve(rec.phi_rec_hat);
    reserve(rec.delta_omega_hat);
    reserve(rec.y);
    reserve(rec.u_fwd_meas);
    reserve(rec.u_refl_meas);
    reserve(rec.u_ff);
    reserve(rec.u_fb);
    reserve(rec.u);
    reserve(rec.innovation_norm);
    reserve(rec.skip_flags);
    reserve(rec.err_fwd);
    reserve(rec.err_rec);
    reserve(rec.err_det);

    EstimatorState est;
    Phasor x;             // truth field at step k
    Phasor u_prev;        // command issued at k-1
    Phasor u_fwd_true;    // true forward wave over [k-1, k)

    for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const double det_k = profiles->detuning[idx];
        const double pf_k = profiles->phi_fwd[idx];
        const double pr_k = profiles->phi_rec[idx];
        const Phasor d_k{profiles->dist_i[idx], profiles->dist_q[idx]};

        Measurements meas;
        meas.pickup = measure_pickup(x, pr_k, noise.sigma_pickup, rng_pickup);
        if (k > 0) {
            const double pf_prev = profiles->phi_fwd[idx - 1];
            meas.forward =
                measure_forward(u_prev, pf_prev, noise.sigma_forward, rng_forward);
            meas.has_forward = true;
            meas.reflected = measure_reflected(u_fwd_true, x, scenario.kappa_truth,
                                               noise.sigma_reflected, rng_reflected);
            meas.has_reflected = true;
        }

        const StepDiagnostics diag = observer_step(est, meas, u_prev, gains, variant,
                                                   scenario.cavity,
                                                   scenario.observer_opts);

        const auto [x_star, x_star_next] = reference_trajectory(pulse, k);
        Phasor x_star_ctrl = x_star;
        Phasor x_star_next_ctrl = x_star_next;
        if (noise.sigma_reference > 0.0) {
            x_star_ctrl.i += noise.sigma_reference * rng_reference.normal();
            x_star_ctrl.q += noise.sigma_reference * rng_reference.normal();
            x_star_next_ctrl.i += noise.sigma_reference * rng_reference.normal();
            x_star_next_ctrl.q += noise.sigma_reference * rng_reference.normal();
        }

        const DriveCommand cmd = control_step(est, x_star_ctrl, x_star_next_ctrl,
                                              scenario.weights, scenario.cavity,
                                              scenario.u_max);

        rec.ref.push_back(x_star);
        rec.x.push_back(x);
        rec.phi_fwd.push_back(pf_k);
        rec.phi_rec.push_back(pr_k);
        rec.delta_omega.push_back(det_k);
        rec.d.push_back(d_k);
        rec.x_hat.push_back(est.x_hat);
        rec.d_hat.push_back(est.d_hat);
        rec.phi_fwd_hat.push_back(est.phi_fwd_hat);
        rec.phi_rec_hat.push_back(est.phi_rec_hat);
        rec.delta_omega_hat.push_back(est.delta_omega_hat);
        rec.y.push_back(meas.pickup);
        rec.u_fwd_meas.push_back(meas.forward);
        rec.u_refl_meas.push_back(meas.reflected);
        rec.u_ff.push_back(cmd.u_ff);
        rec.u_fb.push_back(cmd.u_fb);
        rec.u.push_back(cmd.u_total);
        rec.innovation_norm.push_back(diag.innovation_norm);
        rec.skip_flags.push_back(static_cast<std::uint8_t>(
            (diag.skipped_fwd ? 1u : 0u) | (diag.skipped_detuning ? 2u : 0u) |
            (diag.skipped_rec ? 4u : 0u)));
        rec.err_fwd.push_back(wrap_angle(est.phi_fwd_hat - pf_k));
        rec.err_rec.push_back(wrap_angle(est.phi_rec_hat - pr_k));
        rec.err_det.push_back(est.delta_omega_hat - det_k);

        if (!finite_step(x, cmd, est)) {
            rec.aborted = true;
            rec.abort_step = k;
            break;
        }

        const TruthState truth{x, pf_k, pr_k, det_k, d_k};
        x = step_truth(truth, cmd.u_total, scenario.cavity);
        u_fwd_true = model_rotation(pf_k, scenario.cavity.small_angle) * cmd.u_total;
        u_prev = cmd.u_total;

        if (!x.finite()) {
            rec.aborted = true;
            rec.abort_step = k;
            break;
        }
    }

    const ErrorSeries errs = amplitude_phase_errors(rec, scenario.observer_opts.eps_u);
    rec.e_amp = errs.e_amp;
    rec.e_phase = errs.e_phase;
    rec.phase_valid = errs.phase_valid;
    return rec;
}

ErrorSeries amplitude_phase_errors(const TrialRecord& record, double eps_u) {
    ErrorSeries out;
    const std::size_t n = record.x.size();
    out.e_amp.resize(n, 0.0);
    out.e_phase.resize(n, 0.0);
    out.phase_valid.resize(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const double a_star = record.ref[k].norm();
        const double a = record.x[k].norm();
        out.e_amp[k] = a - a_star;
        if (a_star > 0.0 && a >= eps_u) {
            out.e_phase[k] = wrap_angle(angle(record.x[k]) - angle(record.ref[k]));
            out.phase_valid[k] = 1;
        }
    }
    return out;
}

MetricWindow flattop_window(const MacropulseConfig& cfg) {
    const int n = cfg.n_steps();
    int begin = static_cast<int>(std::ceil(cfg.fill_duration / cfg.ts - 1e-9));
    int end = static_cast<int>(std::floor(cfg.flattop_end / cfg.ts + 1e-9)) + 1;
    if (begin < 0) begin = 0;
    if (end > n) end = n;
    return {begin, end};
}

MetricWindow full_window(const MacropulseConfig& cfg) {
    return {0, cfg.n_steps()};
}

double TrialScores::operator[](MetricChannel c) const {
    switch (c) {
        case MetricChannel::amplitude: return amplitude;
        case MetricChannel::phase: return phase;
        case MetricChannel::fwd: return fwd;
        case MetricChannel::rec: return rec;
        case MetricChannel::detuning: return detuning;
    }
    return 0.0;
}

namespace {

double mean_abs(const std::vector<double>& v, const MetricWindow& w) {
    // Aborted trials log fewer steps than the window; clamp to what exists.
    const int end = std::min(w.end, static_cast<int>(v.size()));
    if (end <= w.begin) return 0.0;
    double sum = 0.0;
    for (int k = w.begin; k < end; ++k) {
        sum += std::fabs(v[static_cast<std::size_t>(k)]);
    }
    return sum / (end - w.begin);
}

}  // namespace

LocalizationScores false_localization_scores(const TrialRecord& record,
                                             const MetricWindow& window) {
    return {mean_abs(record.err_fwd, window), mean_abs(record.err_rec, window),
            mean_abs(record.err_det, window)};
}

TrialScores trial_scores(const TrialRecord& record, const MetricWindow& window) {
    TrialScores s;
    s.amplitude = mean_abs(record.e_amp, window);
    // Phase averages only unmasked samples.
    double sum = 0.0;
    int count = 0;
    const int end = std::min(window.end, static_cast<int>(record.e_phase.size()));
    for (int k = window.begin; k < end; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        if (record.phase_valid[idx]) {
            sum += std::fabs(record.e_phase[idx]);
            ++count;
        }
    }
    s.phase = count > 0 ? sum / count : 0.0;
    const LocalizationScores loc = false_localization_scores(record, window);
    s.fwd = loc.fwd;
    s.rec = loc.rec;
    s.detuning = loc.detuning;
    return s;
}

std::vector<double> exceedance_likelihood(const std::vector<double>& per_trial_scores,
                                          const std::vector<double>& thresholds) {
    if (per_trial_scores.empty()) {
        throw std::invalid_argument("exceedance_likelihood: empty trial set");
    }
    std::vector<double> curve(thresholds.size(), 0.0);
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        int count = 0;
        for (double s : per_trial_scores) {
            if (s > thresholds[j]) ++count;
        }
        curve[j] = static_cast<double>(count) / per_trial_scores.size();
    }
    return curve;
}

std::vector<double> ThresholdGrid::values() const {
    if (count <= 0 || !(min > 0.0) || !(max >= min)) {
        throw std::invalid_argument("threshold grid: need count > 0 and 0 < min <= max");
    }
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = min;
        return v;
    }
    const double ratio = std::log(max / min) / (count - 1);
    for (int j = 0; j < count; ++j) {
        v[static_cast<std::size_t>(j)] = min * std::exp(ratio * j);
    }
    return v;
}

const ThresholdGrid& ThresholdGrids::for_channel(MetricChannel c) const {
    switch (c) {
        case MetricChannel::amplitude: return amplitude;
        case MetricChannel::detuning: return detuning;
        default: return phase;  // phase, fwd, rec share the angular grid
    }
}

namespace {

/// Per-trial payload gathered by workers; reduced in index order afterwards.
struct TrialOutcome {
    bool aborted = false;
    TrialScores scores[kNumWindows];
    // per_sample mode: per-threshold exceedance fractions, [window][channel]
    std::vector<double> fractions[kNumWindows][kNumChannels];
};

std::vector<double> per_sample_fractions(const TrialRecord& record,
                                         const MetricWindow& w, MetricChannel channel,
                                         const std::vector<double>& thresholds) {
    const std::vector<double>* series = nullptr;
    switch (channel) {
        case MetricChannel::amplitude: series = &record.e_amp; break;
        case MetricChannel::phase: series = &record.e_phase; break;
        case MetricChannel::fwd: series = &record.err_fwd; break;
        case MetricChannel::rec: series = &record.err_rec; break;
        case MetricChannel::detuning: series = &record.err_det; break;
    }
    std::vector<double> out(thresholds.size(), 0.0);
    int total = 0;
    const int end = std::min(w.end, static_cast<int>(series->size()));
    for (int k = w.begin; k < end; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        if (channel == MetricChannel::phase && !record.phase_valid[idx]) continue;
        ++total;
        const double e = std::fabs((*series)[idx]);
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            if (e > thresholds[j]) out[j] += 1.0;
        }
    }
    if (total > 0) {
        for (auto& f : out) f /= total;
    }
    return out;
}

TrialOutcome evaluate_trial(const TrialRecord& record, const ScenarioConfig& scenario,
                            const McRequest& req) {
    TrialOutcome out;
    out.aborted = record.aborted;
    if (record.aborted) return out;
    const MetricWindow windows[kNumWindows] = {flattop_window(scenario.pulse),
                                               full_window(scenario.pulse)};
    for (int w = 0; w < kNumWindows; ++w) {
        out.scores[w] = trial_scores(record, windows[w]);
        if (req.mode == MetricMode::per_sample) {
            for (int c = 0; c < kNumChannels; ++c) {
                const auto channel = static_cast<MetricChannel>(c);
                out.fractions[w][c] = per_sample_fractions(
                    record, windows[w], channel,
                    req.grids.for_channel(channel).values());
            }
        }
    }
    return out;
}

EnsembleResult reduce_ensemble(ObserverVariant variant,
                               const std::vector<TrialOutcome>& outcomes,
                               const McRequest& req) {
    EnsembleResult res;
    res.variant = variant;
    res.n_trials = static_cast<int>(outcomes.size());
    res.base_seed = req.base_seed;
    for (const auto& o : outcomes) {
        if (o.aborted) ++res.abort_count;
    }
    for (int w = 0; w < kNumWindows; ++w) {
        for (int c = 0; c < kNumChannels; ++c) {
            const auto channel = static_cast<MetricChannel>(c);
            const std::vector<double> thresholds =
                req.grids.for_channel(channel).values();
            auto& scores = res.scores[w][c];
            for (const auto& o : outcomes) {
                if (!o.aborted) scores.push_back(o.scores[w][channel]);
            }
            Curve& curve = res.curves[w][c];
            curve.thresholds = thresholds;
            if (req.mode == MetricMode::time_average) {
                curve.likelihood = exceedance_likelihood(scores, thresholds);
            } else {
                curve.likelihood.assign(thresholds.size(), 0.0);
                int live = 0;
                for (const auto& o : outcomes) {
                    if (o.aborted) continue;
                    ++live;
                    for (std::size_t j = 0; j < thresholds.size(); ++j) {
                        curve.likelihood[j] += o.fractions[w][c][j];
                    }
                }
                if (live > 0) {
                    for (auto& v : curve.likelihood) v /= live;
                }
            }
        }
    }
    return res;
}

}  // namespace

McResult run_monte_carlo(const ScenarioConfig& scenario, const McRequest& request) {
    if (request.n_trials < 1) {
        throw std::invalid_argument("run_monte_carlo: n_trials must be >= 1");
    }
    const int n = request.n_trials;
    std::vector<TrialOutcome> proposed(static_cast<std::size_t>(n));
    std::vector<TrialOutcome> standard(static_cast<std::size_t>(n));

    int n_threads = request.n_threads;
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads <= 0) n_threads = 1;
    }
    if (n_threads > n) n_threads = n;

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const int trial = next.fetch_add(1);
            if (trial >= n) return;
            try {
                const auto t = static_cast<std::uint64_t>(trial);
                // Paired design: both variants replay the same truth profiles
                // and noise streams for a given trial index.
                const TruthProfiles profiles = synthesize_profiles(
                    TrialSeed{request.base_seed, t}, scenario.stochastic,
                    scenario.pulse.n_steps(), scenario.pulse.ts);
                if (request.run_proposed) {
                    const TrialRecord record =
                        run_trial(request.base_seed, t, scenario,
                                  ObserverVariant::proposed, &profiles);
                    proposed[static_cast<std::size_t>(trial)] =
                        evaluate_trial(record, scenario, request);
                }
                if (request.run_standard) {
                    const TrialRecord record =
                        run_trial(request.base_seed, t, scenario,
                                  ObserverVariant::standard, &profiles);
                    standard[static_cast<std::size_t>(trial)] =
                        evaluate_trial(record, scenario, request);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    McResult result;
    if (request.run_proposed) {
        result.proposed = reduce_ensemble(ObserverVariant::proposed, proposed, request);
    }
    if (request.run_standard) {
        result.standard = reduce_ensemble(ObserverVariant::standard, standard, request);
    }
    return result;
}

}  // namespace llrf
