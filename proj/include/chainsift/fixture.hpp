/// @file fixture.hpp
/// @brief Synthetic dataset generator: benign background traffic plus wallets
///        planted with exactly one suspicious pattern each.
///
/// Design obligations, enforced by construction and covered by tests:
///   - every wallet's totals equal its transfer-log sums, and balances stay
///     nonnegative (outgoing is pre-funded from a pool of mint addresses that
///     are not part of the wallet population);
///   - with default detector parameters, each planted wallet trips exactly
///     its own rule and the benign background trips nothing (benign values
///     are resampled out of the structuring band, and benign per-wallet
///     event spacing keeps counts under every window threshold).

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainsift/ingest.hpp"
#include "chainsift/rules.hpp"

namespace chainsift {

struct PlantedCounts {
    std::size_t smurfing = 50;
    std::size_t structuring = 50;
    std::size_t mixer = 50;
    std::size_t fanout = 50;
    std::size_t burst = 50;

    std::size_t total() const { return smurfing + structuring + mixer + fanout + burst; }
};

struct FixtureParams {
    std::size_t n_wallets = 1000;
    std::size_t n_benign_transfers = 6000;  // approximate; Poisson per wallet
    PlantedCounts planted;
    std::uint64_t seed = 42;
};

struct Fixture {
    std::vector<WalletRecord> records;      // one per wallet, label 1 = planted
    std::vector<TransferRecord> transfers;  // time-sorted
    std::vector<std::string> mixers;        // synthetic mixer service addresses
    std::map<RuleKind, std::vector<std::string>> planted;
};

/// Deterministic per seed. Throws std::invalid_argument on infeasible params
/// (more planted wallets than wallets, or too few benign counterparties).
Fixture generate_fixture(const FixtureParams& params);

}  // namespace chainsift
