/// @file config.hpp
/// @brief Run configuration: one JSON file drives every pipeline command.
///
/// Any scalar key can be overridden from the command line with
/// `--set dotted.path=value`; the effective (post-override) configuration is
/// what gets hashed into the output manifest, so identical effective configs
/// on identical inputs reproduce identical artifacts.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "chainsift/features.hpp"
#include "chainsift/fixture.hpp"
#include "chainsift/learn.hpp"
#include "chainsift/rules.hpp"

namespace chainsift {

struct RunConfig {
    int config_version = 1;

    std::string wallets_path;
    std::string transfers_path;
    std::string mixers_path;
    std::string output_dir = "out";

    std::uint64_t seed = 42;
    bool lenient_parse = false;
    int threads = 0;  // 0 = all available; never changes results

    double train_ratio = 0.70;
    double val_ratio = 0.15;
    double test_ratio = 0.15;
    std::size_t folds = 3;  // < 2 disables cross-validation

    double skew_threshold = 2.0;  // |skewness| above this marks a column skewed
    std::size_t hist_bins = 30;

    bool use_graph = true;
    bool use_transfers = true;
    FeatureConfig features;

    LogisticConfig logistic;
    ForestConfig forest;
    SvmConfig svm;

    RuleParams rules;
    FixtureParams fixture;
};

/// Defaults for every key the file omits; throws ConfigError on unknown keys,
/// malformed values, or ratios that do not sum to 1.
RunConfig load_run_config(const std::string& json_text,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

RunConfig load_run_config_file(const std::string& path,
                               const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Canonical JSON of the effective configuration (defaults filled in,
/// overrides applied, keys sorted).
std::string config_to_json(const RunConfig& config);

/// FNV-1a of config_to_json, hex; recorded in the manifest.
std::string config_hash(const RunConfig& config);

}  // namespace chainsift
