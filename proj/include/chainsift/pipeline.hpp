/// @file pipeline.hpp
/// @brief Command driver: ingest -> profile -> featurize -> train ->
///        evaluate -> compare -> scan, each stage a pure function of
///        (config, inputs) writing its artifacts under the output directory.
///
/// `all` runs the stages in sequence over shared in-memory state; because
/// every stage is deterministic, its artifacts are byte-identical to running
/// the commands one at a time.

#pragma once

#include <string>

#include "chainsift/config.hpp"

namespace chainsift {

enum class Command { Ingest, Profile, Featurize, Train, Evaluate, Compare, Scan, Fixture, All };

Command command_from_string(const std::string& s);

/// Executes one command. Throws ConfigError / InputError / PipelineError;
/// the CLI maps those to exit codes 1 / 2 / 3.
void run_command(Command command, const RunConfig& config);

}  // namespace chainsift
