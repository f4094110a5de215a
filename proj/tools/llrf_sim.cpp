/**
 * @file llrf_sim.cpp
 * @brief Batch CLI: simulate | mc | validate.
 */

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "llrf/commands.hpp"
#include "llrf/config.hpp"
#include "llrf/report.hpp"

namespace {

llrf::RunConfig load(const std::string& config_path) {
    if (config_path.empty()) {
        llrf::RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    return llrf::load_config(config_path);
}

llrf::ObserverVariant parse_variant(const std::string& name) {
    return name == "standard" ? llrf::ObserverVariant::standard
                              : llrf::ObserverVariant::proposed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF cavity baseband regulation and fault-localization simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string variant = "proposed";
    std::string metric_window;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int trials = 0;
    int threads = -1;
    bool flip_sign = false;

    auto* sim = app.add_subcommand("simulate", "write one realization trace as CSV");
    sim->add_option("--config", config_path, "config file (section.key = value)");
    sim->add_option("--seed", seed, "trial seed (default mc.base_seed)")
        ->each([&](const std::string&) { seed_given = true; });
    sim->add_option("--variant", variant, "proposed | standard")
        ->check(CLI::IsMember({"proposed", "standard"}));
    sim->add_option("--out-dir", out_dir, "output directory (default output.dir)");

    auto* mc = app.add_subcommand("mc", "run the Monte Carlo study");
    mc->add_option("--config", config_path, "config file");
    mc->add_option("--seed", seed, "ensemble base seed (default mc.base_seed)")
        ->each([&](const std::string&) { seed_given = true; });
    mc->add_option("--trials", trials, "trial count override");
    std::string mc_variant = "both";
    mc->add_option("--variant", mc_variant, "proposed | standard | both")
        ->check(CLI::IsMember({"proposed", "standard", "both"}));
    mc->add_option("--out-dir", out_dir, "output directory (default output.dir)");
    mc->add_option("--metric-window", metric_window, "flattop | full")
        ->check(CLI::IsMember({"flattop", "full"}));
    mc->add_option("--threads", threads, "worker count (0 = hardware)");

    auto* val = app.add_subcommand("validate", "run the built-in property suite");
    val->add_option("--config", config_path, "config file");
    val->add_flag("--flip-descent-sign", flip_sign,
                  "debug: negate the detuning gradient step (descent must fail)");

    CLI11_PARSE(app, argc, argv);

    try {
        llrf::RunConfig cfg = load(config_path);
        if (seed_given) cfg.mc_base_seed = seed;
        if (trials > 0) cfg.mc_n_trials = trials;
        if (threads >= 0) cfg.mc_threads = threads;
        if (!metric_window.empty()) cfg.metric_window = metric_window;
        if (out_dir.empty()) out_dir = cfg.output_dir;
        cfg.validate();

        if (sim->parsed()) {
            return llrf::cmd_simulate(cfg, cfg.mc_base_seed, parse_variant(variant),
                                      out_dir);
        }
        if (mc->parsed()) {
            llrf::VariantSelection sel = llrf::VariantSelection::both;
            if (mc_variant == "proposed") sel = llrf::VariantSelection::proposed;
            if (mc_variant == "standard") sel = llrf::VariantSelection::standard;
            return llrf::cmd_mc(cfg, sel, out_dir);
        }
        return llrf::cmd_validate(cfg, flip_sign);
    } catch (const llrf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
