/// @file rules.hpp
/// @brief Executable detectors for suspicious-activity patterns, plus a
///        composite wallet risk score.
///
/// All detectors take the time-sorted transfer list (parse_transfer_log
/// order); alert evidence holds indices into that list. Detection is
/// per-wallet independent, and alert lists come back sorted by
/// (wallet, t_start), so resorting the input is the only canonicalization
/// an order-scrambled log needs.
///
/// Severity conventions (all land in (0, 1]):
///   smurfing / structuring / fanout: min(1, qualifying_count / (2 * threshold))
///   mixer: the wallet's share of transfers touching a listed mixer
///   burst: 1 (the pattern is binary)

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chainsift/ingest.hpp"
#include "chainsift/txgraph.hpp"

namespace chainsift {

enum class RuleKind { Smurfing, Structuring, Mixer, Fanout, Burst };

std::string to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& s);

struct RuleAlert {
    std::string wallet;
    RuleKind rule = RuleKind::Smurfing;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    std::vector<std::size_t> evidence;  // indices into the sorted transfer list
    double severity = 0;                // in (0, 1]
};

struct RiskProfile {
    std::string wallet;
    double score = 0;
    std::map<RuleKind, std::size_t> alert_counts;
    std::size_t flagged_neighbor_count = 0;
};

struct SmurfingParams {
    std::size_t min_count = 10;
    std::int64_t max_value = 0;  // <= 0 resolves to the global P10 transfer value
    std::int64_t window = 3600;  // seconds, closed on both ends
};

struct StructuringParams {
    std::int64_t threshold = 10000;
    double band_fraction = 0.05;  // qualifying band: [threshold*(1-band), threshold)
    std::size_t min_count = 3;
};

struct FanoutParams {
    std::size_t min_new = 10;
    std::int64_t window = 24 * 3600;
};

struct BurstParams {
    std::size_t burst_count = 20;
    std::int64_t burst_window = 24 * 3600;
    std::int64_t dormancy_min = 14 * 24 * 3600;
};

struct RiskWeights {
    double smurfing = 1.0;
    double structuring = 1.0;
    double mixer = 1.0;
    double fanout = 1.0;
    double burst = 1.0;
    double neighbor = 1.0;
};

struct RuleParams {
    SmurfingParams smurfing;
    StructuringParams structuring;
    FanoutParams fanout;
    BurstParams burst;
    RiskWeights weights;
};

/// Wallets whose outgoing transfers include >= min_count transfers, each
/// <= max_value, inside some window; overlapping qualifying windows merge
/// into one alert.
std::vector<RuleAlert> detect_smurfing(const std::vector<TransferRecord>& transfers,
                                       const SmurfingParams& params, int threads = 0);

/// Wallets with >= min_count outgoing transfers valued just under the
/// reporting threshold.
std::vector<RuleAlert> detect_structuring(const std::vector<TransferRecord>& transfers,
                                          const StructuringParams& params, int threads = 0);

/// Wallets with any transfer to or from a listed mixer address. Wallets that
/// are themselves listed are the service, not the customer, and are skipped.
std::vector<RuleAlert> detect_mixer_contact(const std::vector<TransferRecord>& transfers,
                                            const std::set<std::string>& mixer_addresses,
                                            int threads = 0);

/// Wallets whose outgoing first-contact counterparties (never seen anywhere
/// in the wallet's earlier history, either direction) reach min_new distinct
/// addresses inside a window.
std::vector<RuleAlert> detect_fanout_new_addresses(const std::vector<TransferRecord>& transfers,
                                                   const FanoutParams& params, int threads = 0);

/// Wallets showing a burst (>= burst_count events in burst_window, either
/// direction), silence for >= dormancy_min, then another burst.
std::vector<RuleAlert> detect_burst_dormancy(const std::vector<TransferRecord>& transfers,
                                             const BurstParams& params, int threads = 0);

/// Weighted sum of the wallet's alert severities plus a flagged-neighbor
/// term: neighbor_weight * flagged_direct_neighbors / max(1, degree).
RiskProfile wallet_risk_score(const std::string& wallet, const std::vector<RuleAlert>& alerts,
                              const TransactionGraph& graph,
                              const std::set<std::string>& flagged, const RiskWeights& weights);

/// All five detectors over one log, merged and sorted by
/// (wallet, rule, t_start).
std::vector<RuleAlert> scan_all(const std::vector<TransferRecord>& transfers,
                                const std::set<std::string>& mixer_addresses,
                                const RuleParams& params, int threads = 0);

std::string alerts_jsonl(const std::vector<RuleAlert>& alerts);
std::string risk_csv(const std::vector<RiskProfile>& profiles);

}  // namespace chainsift
