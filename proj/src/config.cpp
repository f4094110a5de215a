#include "llrf/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace llrf {

namespace {

enum class FieldType { f64, i32, u64, boolean, text };

struct FieldDef {
    const char* key;
    FieldType type;
    double RunConfig::* f64 = nullptr;
    int RunConfig::* i32 = nullptr;
    std::uint64_t RunConfig::* u64 = nullptr;
    bool RunConfig::* flag = nullptr;
    std::string RunConfig::* text = nullptr;
    // Execution details (worker count, output location) never reach the
    // canonical serialization: they cannot change results, so equal hashes
    // must keep meaning byte-identical outputs.
    bool execution_detail = false;
};

FieldDef f64_field(const char* key, double RunConfig::* m) {
    FieldDef d{key, FieldType::f64};
    d.f64 = m;
    return d;
}
FieldDef i32_field(const char* key, int RunConfig::* m) {
    FieldDef d{key, FieldType::i32};
    d.i32 = m;
    return d;
}
FieldDef u64_field(const char* key, std::uint64_t RunConfig::* m) {
    FieldDef d{key, FieldType::u64};
    d.u64 = m;
    return d;
}
FieldDef bool_field(const char* key, bool RunConfig::* m) {
    FieldDef d{key, FieldType::boolean};
    d.flag = m;
    return d;
}
FieldDef text_field(const char* key, std::string RunConfig::* m) {
    FieldDef d{key, FieldType::text};
    d.text = m;
    return d;
}

// Declaration order defines the canonical serialization order.
const std::vector<FieldDef>& field_table() {
    static const std::vector<FieldDef> table = {
        f64_field("cavity.omega0", &RunConfig::cavity_omega0),
        f64_field("cavity.q_loaded", &RunConfig::cavity_q_loaded),
        f64_field("cavity.ts", &RunConfig::cavity_ts),
        bool_field("cavity.small_angle", &RunConfig::cavity_small_angle),
        f64_field("macropulse.fill_duration", &RunConfig::macropulse_fill_duration),
        f64_field("macropulse.flattop_end", &RunConfig::macropulse_flattop_end),
        f64_field("macropulse.horizon", &RunConfig::macropulse_horizon),
        f64_field("macropulse.flattop_amplitude",
                  &RunConfig::macropulse_flattop_amplitude),
        f64_field("macropulse.flattop_phase", &RunConfig::macropulse_flattop_phase),
        bool_field("macropulse.hold_tail", &RunConfig::macropulse_hold_tail),
        f64_field("noise.sigma_pickup", &RunConfig::noise_sigma_pickup),
        f64_field("noise.sigma_reflected", &RunConfig::noise_sigma_reflected),
        f64_field("noise.sigma_reference", &RunConfig::noise_sigma_reference),
        f64_field("noise.sigma_forward", &RunConfig::noise_sigma_forward),
        f64_field("detuning.bias_range", &RunConfig::detuning_bias_range),
        i32_field("detuning.n_sinusoids_min", &RunConfig::detuning_n_sinusoids_min),
        i32_field("detuning.n_sinusoids_max", &RunConfig::detuning_n_sinusoids_max),
        f64_field("detuning.sinusoid_amp_range",
                  &RunConfig::detuning_sinusoid_amp_range),
        f64_field("detuning.sinusoid_freq_min", &RunConfig::detuning_sinusoid_freq_min),
        f64_field("detuning.sinusoid_freq_max", &RunConfig::detuning_sinusoid_freq_max),
        f64_field("detuning.wander_std", &RunConfig::detuning_wander_std),
        f64_field("detuning.thermal_amp", &RunConfig::detuning_thermal_amp),
        f64_field("detuning.thermal_tau", &RunConfig::detuning_thermal_tau),
        f64_field("drift_fwd.init_range", &RunConfig::drift_fwd_init_range),
        f64_field("drift_fwd.walk_std", &RunConfig::drift_fwd_walk_std),
        f64_field("drift_fwd.periodic_amp", &RunConfig::drift_fwd_periodic_amp),
        f64_field("drift_fwd.periodic_freq_min",
                  &RunConfig::drift_fwd_periodic_freq_min),
        f64_field("drift_fwd.periodic_freq_max",
                  &RunConfig::drift_fwd_periodic_freq_max),
        f64_field("drift_rec.init_range", &RunConfig::drift_rec_init_range),
        f64_field("drift_rec.walk_std", &RunConfig::drift_rec_walk_std),
        f64_field("drift_rec.periodic_amp", &RunConfig::drift_rec_periodic_amp),
        f64_field("drift_rec.periodic_freq_min",
                  &RunConfig::drift_rec_periodic_freq_min),
        f64_field("drift_rec.periodic_freq_max",
                  &RunConfig::drift_rec_periodic_freq_max),
        f64_field("disturbance.init_range", &RunConfig::disturbance_init_range),
        f64_field("disturbance.walk_std", &RunConfig::disturbance_walk_std),
        f64_field("disturbance.periodic_amp", &RunConfig::disturbance_periodic_amp),
        f64_field("disturbance.periodic_freq_min",
                  &RunConfig::disturbance_periodic_freq_min),
        f64_field("disturbance.periodic_freq_max",
                  &RunConfig::disturbance_periodic_freq_max),
        f64_field("observer_proposed.alpha_x", &RunConfig::observer_proposed_alpha_x),
        f64_field("observer_proposed.alpha_d", &RunConfig::observer_proposed_alpha_d),
        f64_field("observer_proposed.alpha_omega",
                  &RunConfig::observer_proposed_alpha_omega),
        f64_field("observer_proposed.alpha_fwd",
                  &RunConfig::observer_proposed_alpha_fwd),
        f64_field("observer_proposed.alpha_rec",
                  &RunConfig::observer_proposed_alpha_rec),
        f64_field("observer_proposed.kappa", &RunConfig::observer_proposed_kappa),
        f64_field("observer_standard.alpha_x", &RunConfig::observer_standard_alpha_x),
        f64_field("observer_standard.alpha_d", &RunConfig::observer_standard_alpha_d),
        f64_field("observer_standard.alpha_omega",
                  &RunConfig::observer_standard_alpha_omega),
        f64_field("observer_standard.alpha_fwd",
                  &RunConfig::observer_standard_alpha_fwd),
        f64_field("observer_standard.alpha_rec",
                  &RunConfig::observer_standard_alpha_rec),
        f64_field("observer_standard.kappa", &RunConfig::observer_standard_kappa),
        f64_field("observer.eps_u", &RunConfig::observer_eps_u),
        f64_field("observer.drive_floor", &RunConfig::observer_drive_floor),
        bool_field("observer.literal_drift_integrator",
                   &RunConfig::observer_literal_drift_integrator),
        f64_field("control.q_weight", &RunConfig::control_q_weight),
        f64_field("control.r_weight", &RunConfig::control_r_weight),
        f64_field("control.u_max", &RunConfig::control_u_max),
        i32_field("mc.n_trials", &RunConfig::mc_n_trials),
        u64_field("mc.base_seed", &RunConfig::mc_base_seed),
        []() {
            FieldDef d = i32_field("mc.threads", &RunConfig::mc_threads);
            d.execution_detail = true;
            return d;
        }(),
        text_field("metric.window", &RunConfig::metric_window),
        text_field("metric.mode", &RunConfig::metric_mode),
        f64_field("metric.amplitude_threshold_min",
                  &RunConfig::metric_amplitude_threshold_min),
        f64_field("metric.amplitude_threshold_max",
                  &RunConfig::metric_amplitude_threshold_max),
        i32_field("metric.amplitude_threshold_count",
                  &RunConfig::metric_amplitude_threshold_count),
        f64_field("metric.phase_threshold_min",
                  &RunConfig::metric_phase_threshold_min),
        f64_field("metric.phase_threshold_max",
                  &RunConfig::metric_phase_threshold_max),
        i32_field("metric.phase_threshold_count",
                  &RunConfig::metric_phase_threshold_count),
        f64_field("metric.detuning_threshold_min",
                  &RunConfig::metric_detuning_threshold_min),
        f64_field("metric.detuning_threshold_max",
                  &RunConfig::metric_detuning_threshold_max),
        i32_field("metric.detuning_threshold_count",
                  &RunConfig::metric_detuning_threshold_count),
        []() {
            FieldDef d = text_field("output.dir", &RunConfig::output_dir);
            d.execution_detail = true;
            return d;
        }(),
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& why) {
    std::ostringstream msg;
    msg << source << ":" << line << ": " << why;
    throw ConfigError(msg.str());
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash_pos = raw.find('#');
        std::string line = trim(hash_pos == std::string::npos ? raw : raw.substr(0, hash_pos));
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            parse_fail(source, line_no, "expected 'section.key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) parse_fail(source, line_no, "missing key before '='");
        if (value.empty()) parse_fail(source, line_no, "missing value for key '" + key + "'");

        const FieldDef* def = nullptr;
        for (const auto& d : field_table()) {
            if (key == d.key) {
                def = &d;
                break;
            }
        }
        if (def == nullptr) parse_fail(source, line_no, "unknown key '" + key + "'");

        const char* cstr = value.c_str();
        char* end = nullptr;
        switch (def->type) {
            case FieldType::f64: {
                const double v = std::strtod(cstr, &end);
                if (end == cstr || *end != '\0') {
                    parse_fail(source, line_no, "expected number for key '" + key + "'");
                }
                cfg.*(def->f64) = v;
                break;
            }
            case FieldType::i32: {
                const long v = std::strtol(cstr, &end, 10);
                if (end == cstr || *end != '\0') {
                    parse_fail(source, line_no, "expected integer for key '" + key + "'");
                }
                cfg.*(def->i32) = static_cast<int>(v);
                break;
            }
            case FieldType::u64: {
                const unsigned long long v = std::strtoull(cstr, &end, 10);
                if (end == cstr || *end != '\0') {
                    parse_fail(source, line_no,
                               "expected unsigned integer for key '" + key + "'");
                }
                cfg.*(def->u64) = static_cast<std::uint64_t>(v);
                break;
            }
            case FieldType::boolean: {
                if (value == "true") {
                    cfg.*(def->flag) = true;
                } else if (value == "false") {
                    cfg.*(def->flag) = false;
                } else {
                    parse_fail(source, line_no,
                               "expected true/false for key '" + key + "'");
                }
                break;
            }
            case FieldType::text:
                cfg.*(def->text) = value;
                break;
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str(), path);
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    try {
        ScenarioConfig s = to_scenario();
        s.pulse.validate();
        s.gains_proposed.validate();
        s.gains_standard.validate();
        s.weights.validate();
        s.stochastic.detuning.validate(cavity_ts);
        s.stochastic.drift_fwd.validate(cavity_ts);
        s.stochastic.drift_rec.validate(cavity_ts);
        s.stochastic.disturbance.validate(cavity_ts);
        grids().amplitude.values();
        grids().phase.values();
        grids().detuning.values();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config invalid: ") + e.what());
    }
    if (noise_sigma_pickup < 0.0 || noise_sigma_reflected < 0.0 ||
        noise_sigma_reference < 0.0 || noise_sigma_forward < 0.0) {
        throw ConfigError("config invalid: noise sigmas must be >= 0");
    }
    if (observer_eps_u < 0.0 || observer_drive_floor < 0.0) {
        throw ConfigError("config invalid: observer.eps_u and observer.drive_floor must be >= 0");
    }
    if (control_u_max < 0.0) {
        throw ConfigError("config invalid: control.u_max must be >= 0");
    }
    if (mc_n_trials < 1) {
        throw ConfigError("config invalid: mc.n_trials must be >= 1");
    }
    if (mc_threads < 0) {
        throw ConfigError("config invalid: mc.threads must be >= 0");
    }
    if (metric_window != "flattop" && metric_window != "full") {
        throw ConfigError("config invalid: metric.window must be flattop or full");
    }
    if (metric_mode != "time_average" && metric_mode != "per_sample") {
        throw ConfigError("config invalid: metric.mode must be time_average or per_sample");
    }
}

ScenarioConfig RunConfig::to_scenario() const {
    ScenarioConfig s;
    s.cavity = CavityParams::make(cavity_omega0, cavity_q_loaded, cavity_ts,
                                  cavity_small_angle);
    s.pulse.ts = cavity_ts;
    s.pulse.fill_duration = macropulse_fill_duration;
    s.pulse.flattop_end = macropulse_flattop_end;
    s.pulse.horizon = macropulse_horizon;
    s.pulse.flattop_amplitude = macropulse_flattop_amplitude;
    s.pulse.flattop_phase = macropulse_flattop_phase;
    s.pulse.hold_tail = macropulse_hold_tail;

    s.stochastic.noise = {noise_sigma_pickup, noise_sigma_reflected,
                          noise_sigma_reference, noise_sigma_forward};
    s.stochastic.detuning = {detuning_bias_range,
                             detuning_n_sinusoids_min,
                             detuning_n_sinusoids_max,
                             detuning_sinusoid_amp_range,
                             detuning_sinusoid_freq_min,
                             detuning_sinusoid_freq_max,
                             detuning_wander_std,
                             detuning_thermal_amp,
                             detuning_thermal_tau};
    s.stochastic.drift_fwd = {drift_fwd_init_range, drift_fwd_walk_std,
                              drift_fwd_periodic_amp, drift_fwd_periodic_freq_min,
                              drift_fwd_periodic_freq_max};
    s.stochastic.drift_rec = {drift_rec_init_range, drift_rec_walk_std,
                              drift_rec_periodic_amp, drift_rec_periodic_freq_min,
                              drift_rec_periodic_freq_max};
    s.stochastic.disturbance = {disturbance_init_range, disturbance_walk_std,
                                disturbance_periodic_amp, disturbance_periodic_freq_min,
                                disturbance_periodic_freq_max};

    s.gains_proposed = {observer_proposed_alpha_x,   observer_proposed_alpha_d,
                        observer_proposed_alpha_omega, observer_proposed_alpha_fwd,
                        observer_proposed_alpha_rec, observer_proposed_kappa};
    s.gains_standard = {observer_standard_alpha_x,   observer_standard_alpha_d,
                        observer_standard_alpha_omega, observer_standard_alpha_fwd,
                        observer_standard_alpha_rec, observer_standard_kappa};
    s.observer_opts = {observer_eps_u, observer_drive_floor,
                       observer_literal_drift_integrator};
    s.weights.q = Mat2::scaled_identity(control_q_weight);
    s.weights.r = Mat2::scaled_identity(control_r_weight);
    s.kappa_truth = observer_proposed_kappa;
    s.u_max = control_u_max;
    return s;
}

ThresholdGrids RunConfig::grids() const {
    ThresholdGrids g;
    g.amplitude = {metric_amplitude_threshold_min, metric_amplitude_threshold_max,
                   metric_amplitude_threshold_count};
    g.phase = {metric_phase_threshold_min, metric_phase_threshold_max,
               metric_phase_threshold_count};
    g.detuning = {metric_detuning_threshold_min, metric_detuning_threshold_max,
                  metric_detuning_threshold_count};
    return g;
}

MetricMode RunConfig::mode() const {
    return metric_mode == "per_sample" ? MetricMode::per_sample
                                       : MetricMode::time_average;
}

Window RunConfig::headline_window() const {
    return metric_window == "full" ? Window::full : Window::flattop;
}

std::string RunConfig::canonical_text() const {
    std::ostringstream out;
    char buf[64];
    for (const auto& d : field_table()) {
        if (d.execution_detail) continue;
        out << d.key << " = ";
        switch (d.type) {
            case FieldType::f64:
                std::snprintf(buf, sizeof(buf), "%.17g", this->*(d.f64));
                out << buf;
                break;
            case FieldType::i32: out << this->*(d.i32); break;
            case FieldType::u64: out << this->*(d.u64); break;
            case FieldType::boolean: out << (this->*(d.flag) ? "true" : "false"); break;
            case FieldType::text: out << this->*(d.text); break;
        }
        out << '\n';
    }
    return out.str();
}

std::uint64_t RunConfig::hash() const {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical_text()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace llrf
