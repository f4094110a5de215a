#pragma once
/**
 * @file validate.hpp
 * @brief Built-in self-check suite behind the `validate` subcommand.
 *
 * Checks run against the loaded config where it matters (sampling period,
 * gains), so e.g. doubling ts visibly scales the discretization error. The
 * exponential reference here is computed from scratch with complex
 * arithmetic, independent of the plant stepping code it cross-checks.
 */

#include <string>
#include <vector>

#include "llrf/config.hpp"

namespace llrf {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Run the property suite: rotation identities, small-angle bound,
/// Euler-vs-exponential discretization error, noise-free closed-loop
/// exactness, and the detuning descent-sign test. `flip_descent_sign`
/// negates the gradient step as a negative control (the descent property
/// must then fail).
std::vector<PropertyResult> run_property_suite(const RunConfig& config,
                                               bool flip_descent_sign = false);

}  // namespace llrf
