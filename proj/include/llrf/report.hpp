#pragma once
/**
 * @file report.hpp
 * @brief CSV/manifest writers for trial traces and ensemble curves.
 *
 * All files are plain text, schema-versioned in a leading comment row, and
 * embed the config hash and seed so equal (hash, seed) pairs are byte-equal.
 * No timestamps anywhere; reruns must reproduce files exactly.
 */

#include <string>

#include "llrf/config.hpp"
#include "llrf/harness.hpp"

namespace llrf {

/// Build identifier baked in at compile time (git-describe style).
const char* build_tag();

std::string variant_name(ObserverVariant v);
std::string channel_name(MetricChannel c);
std::string window_name(Window w);

/// One trial as CSV: a column per logged quantity, a row per step.
/// @throws std::runtime_error with the path on I/O failure.
void write_trace_csv(const std::string& path, const TrialRecord& record,
                     const RunConfig& config, std::uint64_t seed,
                     ObserverVariant variant);

/// Exceedance curves for one variant: metric,window,threshold,likelihood.
void write_curves_csv(const std::string& path, const EnsembleResult& ensemble,
                      const RunConfig& config);

/// Run manifest: build tag, hash, seed, abort counts, full config echo.
void write_manifest(const std::string& path, const RunConfig& config,
                    const McResult& result);

}  // namespace llrf
