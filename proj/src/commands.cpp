#include "llrf/commands.hpp"

#include <cstdio>
#include <filesystem>

#include "llrf/report.hpp"
#include "llrf/validate.hpp"

namespace llrf {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir +
                                 "': " + ec.message());
    }
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::uint64_t seed, ObserverVariant variant,
                 const std::string& out_dir) {
    config.validate();
    ensure_dir(out_dir);
    const ScenarioConfig scenario = config.to_scenario();
    const TrialRecord record = run_trial(seed, 0, scenario, variant);
    const std::string path = out_dir + "/trace_" + variant_name(variant) + ".csv";
    write_trace_csv(path, record, config, seed, variant);
    std::printf("wrote %s (%zu steps%s)\n", path.c_str(), record.x.size(),
                record.aborted ? ", ABORTED" : "");
    return record.aborted ? 4 : 0;
}

int cmd_mc(const RunConfig& config, VariantSelection variants,
           const std::string& out_dir) {
    config.validate();
    ensure_dir(out_dir);
    const ScenarioConfig scenario = config.to_scenario();

    McRequest req;
    req.n_trials = config.mc_n_trials;
    req.base_seed = config.mc_base_seed;
    req.run_proposed = variants != VariantSelection::standard;
    req.run_standard = variants != VariantSelection::proposed;
    req.grids = config.grids();
    req.mode = config.mode();
    req.n_threads = config.mc_threads;

    const McResult result = run_monte_carlo(scenario, req);

    int aborted = 0;
    for (const auto* ens : {&result.proposed, &result.standard}) {
        if (!ens->has_value()) continue;
        const std::string path =
            out_dir + "/curves_" + variant_name((*ens)->variant) + ".csv";
        write_curves_csv(path, **ens, config);
        aborted += (*ens)->abort_count;
        std::printf("wrote %s (%d trials, %d aborted)\n", path.c_str(),
                    (*ens)->n_trials, (*ens)->abort_count);
    }
    write_manifest(out_dir + "/manifest.txt", config, result);

    const int runs = req.n_trials * ((req.run_proposed ? 1 : 0) +
                                     (req.run_standard ? 1 : 0));
    if (runs > 0 && static_cast<double>(aborted) / runs > 0.01) {
        std::fprintf(stderr, "error: %d of %d trial runs aborted (> 1%%)\n", aborted,
                     runs);
        return 4;
    }
    return 0;
}

int cmd_validate(const RunConfig& config, bool flip_descent_sign) {
    config.validate();
    const auto results = run_property_suite(config, flip_descent_sign);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 3;
}

}  // namespace llrf
