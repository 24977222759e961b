#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "jsde/models.hpp"

namespace jsde {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    std::string output_dir = ".";
};

/// Builds a layered measure from its JSON description (families: power_law,
/// exponential, point_masses, uniform, product_uniform).
LayeredMeasure measure_from_config(const nlohmann::json& config);

/// Builds a model from its JSON description: the named presets h_alpha,
/// counterexample, bertoin_legall, doering_barczy, or "custom" combining the
/// built-in coefficient families.
BuiltModel model_from_config(const nlohmann::json& config);

/// FNV-1a hash of the canonical (sorted-key) dump, reproduced in every
/// artifact header.
std::string config_hash_hex(const nlohmann::json& config);

/// Validates the config, runs the named experiment, writes its artifact
/// under opts.output_dir, and returns the exit status: 0 pass, 1 violation,
/// 2 config error. Diagnostics go to `diag`.
int run_experiment(nlohmann::json config, const RunOptions& opts,
                   std::ostream& diag);

}  // namespace jsde
