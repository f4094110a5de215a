#include "llrf/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef LLRF_BUILD_TAG
#define LLRF_BUILD_TAG "untagged"
#endif

namespace llrf {

const char* build_tag() { return LLRF_BUILD_TAG; }

std::string variant_name(ObserverVariant v) {
    return v == ObserverVariant::proposed ? "proposed" : "standard";
}

std::string channel_name(MetricChannel c) {
    switch (c) {
        case MetricChannel::amplitude: return "amplitude";
        case MetricChannel::phase: return "phase";
        case MetricChannel::fwd: return "fwd_drift";
        case MetricChannel::rec: return "rec_drift";
        case MetricChannel::detuning: return "detuning";
    }
    return "?";
}

std::string window_name(Window w) {
    return w == Window::flattop ? "flattop" : "full";
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // fixed newlines on any platform
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void write_trace_csv(const std::string& path, const TrialRecord& record,
                     const RunConfig& config, std::uint64_t seed,
                     ObserverVariant variant) {
    std::ofstream out = open_out(path);
    out << "# schema=llrf-trace-v1 config_hash=" << hex64(config.hash())
        << " seed=" << seed << " variant=" << variant_name(variant)
        << " build=" << build_tag() << "\n";
    out << "# units: t[s], phasor columns [normalized volts], angles [rad], "
           "detuning [rad/s], d [volts/s], e_amp [normalized volts], e_phase [rad]\n";
    if (record.aborted) {
        out << "# aborted=true abort_step=" << record.abort_step << "\n";
    }
    out << "step,t,ref_i,ref_q,x_i,x_q,phi_fwd,phi_rec,delta_omega,d_i,d_q,"
           "xhat_i,xhat_q,dhat_i,dhat_q,phi_fwd_hat,phi_rec_hat,delta_omega_hat,"
           "y_i,y_q,ufwd_meas_i,ufwd_meas_q,urefl_meas_i,urefl_meas_q,"
           "uff_i,uff_q,ufb_i,ufb_q,u_i,u_q,innov_norm,skip_flags,"
           "e_amp,e_phase,phase_valid,err_fwd,err_rec,err_det\n";
    const std::size_t n = record.x.size();
    for (std::size_t k = 0; k < n; ++k) {
        out << k << ',' << num(static_cast<double>(k) * record.ts) << ','
            << num(record.ref[k].i) << ',' << num(record.ref[k].q) << ','
            << num(record.x[k].i) << ',' << num(record.x[k].q) << ','
            << num(record.phi_fwd[k]) << ',' << num(record.phi_rec[k]) << ','
            << num(record.delta_omega[k]) << ',' << num(record.d[k].i) << ','
            << num(record.d[k].q) << ',' << num(record.x_hat[k].i) << ','
            << num(record.x_hat[k].q) << ',' << num(record.d_hat[k].i) << ','
            << num(record.d_hat[k].q) << ',' << num(record.phi_fwd_hat[k]) << ','
            << num(record.phi_rec_hat[k]) << ',' << num(record.delta_omega_hat[k])
            << ',' << num(record.y[k].i) << ',' << num(record.y[k].q) << ','
            << num(record.u_fwd_meas[k].i) << ',' << num(record.u_fwd_meas[k].q) << ','
            << num(record.u_refl_meas[k].i) << ',' << num(record.u_refl_meas[k].q)
            << ',' << num(record.u_ff[k].i) << ',' << num(record.u_ff[k].q) << ','
            << num(record.u_fb[k].i) << ',' << num(record.u_fb[k].q) << ','
            << num(record.u[k].i) << ',' << num(record.u[k].q) << ','
            << num(record.innovation_norm[k]) << ','
            << static_cast<int>(record.skip_flags[k]) << ',' << num(record.e_amp[k])
            << ',' << num(record.e_phase[k]) << ','
            << static_cast<int>(record.phase_valid[k]) << ','
            << num(record.err_fwd[k]) << ',' << num(record.err_rec[k]) << ','
            << num(record.err_det[k]) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_curves_csv(const std::string& path, const EnsembleResult& ensemble,
                      const RunConfig& config) {
    std::ofstream out = open_out(path);
    out << "# schema=llrf-curves-v1 config_hash=" << hex64(config.hash())
        << " seed=" << ensemble.base_seed << " variant="
        << variant_name(ensemble.variant) << " n_trials=" << ensemble.n_trials
        << " aborted=" << ensemble.abort_count << " build=" << build_tag() << "\n";
    out << "metric,window,threshold,likelihood\n";
    for (int w = 0; w < kNumWindows; ++w) {
        for (int c = 0; c < kNumChannels; ++c) {
            const Curve& curve = ensemble.curves[w][c];
            for (std::size_t j = 0; j < curve.thresholds.size(); ++j) {
                out << channel_name(static_cast<MetricChannel>(c)) << ','
                    << window_name(static_cast<Window>(w)) << ','
                    << num(curve.thresholds[j]) << ',' << num(curve.likelihood[j])
                    << "\n";
            }
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const std::string& path, const RunConfig& config,
                    const McResult& result) {
    std::ofstream out = open_out(path);
    out << "# llrf run manifest\n";
    out << "build = " << build_tag() << "\n";
    out << "config_hash = " << hex64(config.hash()) << "\n";
    out << "seed = " << config.mc_base_seed << "\n";
    std::string variants;
    if (result.proposed) variants += "proposed";
    if (result.standard) variants += variants.empty() ? "standard" : ",standard";
    out << "variants = " << variants << "\n";
    out << "n_trials = " << config.mc_n_trials << "\n";
    if (result.proposed) {
        out << "aborted_proposed = " << result.proposed->abort_count << "\n";
    }
    if (result.standard) {
        out << "aborted_standard = " << result.standard->abort_count << "\n";
    }
    out << "\n[config]\n" << config.canonical_text();
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace llrf
