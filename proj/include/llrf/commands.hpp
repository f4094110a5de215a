#pragma once
/**
 * @file commands.hpp
 * @brief Batch subcommand implementations behind the CLI.
 *
 * Exit codes: 0 success, 2 config error (raised as ConfigError before these
 * run), 3 property failure, 4 excessive trial aborts (> 1%).
 */

#include <cstdint>
#include <string>

#include "llrf/config.hpp"
#include "llrf/harness.hpp"

namespace llrf {

/// Which observer variants a command should run.
enum class VariantSelection { proposed, standard, both };

/// Simulate one realization and write `trace_<variant>.csv` into out_dir.
int cmd_simulate(const RunConfig& config, std::uint64_t seed, ObserverVariant variant,
                 const std::string& out_dir);

/// Run the Monte Carlo study; writes per-variant `curves_<variant>.csv` plus
/// `manifest.txt` into out_dir. Returns 4 if more than 1% of trials aborted.
int cmd_mc(const RunConfig& config, VariantSelection variants,
           const std::string& out_dir);

/// Run the built-in property suite, printing one line per property.
/// Returns 3 on any failure. `flip_descent_sign` is a debug negative control.
int cmd_validate(const RunConfig& config, bool flip_descent_sign = false);

}  // namespace llrf
