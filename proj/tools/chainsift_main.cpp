// chainsift - wallet-transaction screening toolkit.
//
// Usage:
//   chainsift <command> [--config cfg.json] [options]
// Commands:
//   ingest | profile | featurize | train | evaluate | compare | scan |
//   fixture | all
//
// Exit codes: 0 ok, 1 invalid config, 2 missing/unreadable input,
// 3 pipeline error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainsift/errors.hpp"
#include "chainsift/pipeline.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& kv : raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw chainsift::ConfigError("--set expects key=value, got '" + kv + "'");
        out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chainsift - wallet-transaction screening toolkit"};
    app.require_subcommand(0);

    std::string command;
    std::string config_path;
    std::vector<std::string> sets;
    std::string wallets, transfers, mixers, out_dir;
    std::int64_t seed = -1;
    int threads = -1;
    bool lenient = false;

    app.add_option("command", command,
                   "ingest|profile|featurize|train|evaluate|compare|scan|fixture|all")
        ->required();
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--set", sets, "override a scalar config key (dotted.path=value)");
    app.add_option("--wallets", wallets, "wallet summary CSV/JSONL");
    app.add_option("--transfers", transfers, "transfer log CSV/JSONL");
    app.add_option("--mixers", mixers, "mixer address list, one per line");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker cap (0 = all); results do not depend on it");
    app.add_flag("--lenient", lenient, "collect row errors instead of aborting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "chainsift: error: " << e.what() << "\n";
        return 1;
    }

    try {
        auto overrides = parse_overrides(sets);
        if (!wallets.empty()) overrides.emplace_back("inputs.wallets", wallets);
        if (!transfers.empty()) overrides.emplace_back("inputs.transfers", transfers);
        if (!mixers.empty()) overrides.emplace_back("inputs.mixers", mixers);
        if (!out_dir.empty()) overrides.emplace_back("output_dir", out_dir);
        if (seed >= 0) overrides.emplace_back("seed", std::to_string(seed));
        if (threads >= 0) overrides.emplace_back("threads", std::to_string(threads));
        if (lenient) overrides.emplace_back("lenient_parse", "true");

        const auto cmd = chainsift::command_from_string(command);
        const auto config = config_path.empty()
                                ? chainsift::load_run_config("{}", overrides)
                                : chainsift::load_run_config_file(config_path, overrides);
        chainsift::run_command(cmd, config);
        return 0;
    } catch (const chainsift::ConfigError& e) {
        std::cerr << "chainsift: error: " << e.what() << "\n";
        return 1;
    } catch (const chainsift::InputError& e) {
        std::cerr << "chainsift: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "chainsift: error: " << e.what() << "\n";
        return 3;
    }
}
