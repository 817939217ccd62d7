#include "chainsift/rules.hpp"

#include <omp.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chainsift/features.hpp"
#include "chainsift/io_util.hpp"

namespace chainsift {

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::Smurfing: return "smurfing";
        case RuleKind::Structuring: return "structuring";
        case RuleKind::Mixer: return "mixer";
        case RuleKind::Fanout: return "fanout";
        case RuleKind::Burst: return "burst";
    }
    return "smurfing";
}

RuleKind rule_kind_from_string(const std::string& s) {
    if (s == "smurfing") return RuleKind::Smurfing;
    if (s == "structuring") return RuleKind::Structuring;
    if (s == "mixer") return RuleKind::Mixer;
    if (s == "fanout") return RuleKind::Fanout;
    if (s == "burst") return RuleKind::Burst;
    throw std::invalid_argument("unknown rule '" + s + "'");
}

namespace {

// Wallet -> indices of transfers touching it, in time order. std::map keeps
// wallet iteration (and therefore alert order) deterministic.
std::map<std::string, std::vector<std::size_t>> group_events(
    const std::vector<TransferRecord>& transfers) {
    for (std::size_t i = 1; i < transfers.size(); ++i)
        if (transfers[i - 1].timestamp > transfers[i].timestamp)
            throw std::invalid_argument("detectors require a time-sorted transfer list");
    std::map<std::string, std::vector<std::size_t>> by_wallet;
    for (std::size_t i = 0; i < transfers.size(); ++i) {
        by_wallet[transfers[i].src].push_back(i);
        if (!transfers[i].self_transfer()) by_wallet[transfers[i].dst].push_back(i);
    }
    return by_wallet;
}

// Maximal runs of qualifying sliding windows over time-ordered events:
// every window [t_a, t_a + window] holding >= min_count events becomes a
// position interval, and overlapping intervals merge.
std::vector<std::pair<std::size_t, std::size_t>> qualifying_clusters(
    const std::vector<TransferRecord>& transfers, const std::vector<std::size_t>& events,
    std::size_t min_count, std::int64_t window) {
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    std::size_t b = 0;
    for (std::size_t a = 0; a < events.size(); ++a) {
        if (b < a) b = a;
        while (b + 1 < events.size() &&
               transfers[events[b + 1]].timestamp <= transfers[events[a]].timestamp + window)
            ++b;
        if (b - a + 1 < min_count) continue;
        if (!merged.empty() && a <= merged.back().second)
            merged.back().second = std::max(merged.back().second, b);
        else
            merged.emplace_back(a, b);
    }
    return merged;
}

RuleAlert make_alert(const std::vector<TransferRecord>& transfers, const std::string& wallet,
                     RuleKind rule, std::vector<std::size_t> evidence, double severity) {
    RuleAlert a;
    a.wallet = wallet;
    a.rule = rule;
    a.t_start = transfers[evidence.front()].timestamp;
    a.t_end = transfers[evidence.back()].timestamp;
    a.evidence = std::move(evidence);
    a.severity = severity;
    return a;
}

// Runs `fn` per wallet (in address order) and flattens the per-wallet alert
// lists in that same order, independent of the thread count.
template <typename Fn>
std::vector<RuleAlert> per_wallet(const std::map<std::string, std::vector<std::size_t>>& groups,
                                  int threads, Fn&& fn) {
    std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> items;
    items.reserve(groups.size());
    for (const auto& kv : groups) items.push_back(&kv);

    std::vector<std::vector<RuleAlert>> slots(items.size());
#pragma omp parallel for schedule(dynamic, 32) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(items.size()); ++i) {
        slots[static_cast<std::size_t>(i)] =
            fn(items[static_cast<std::size_t>(i)]->first, items[static_cast<std::size_t>(i)]->second);
    }

    std::vector<RuleAlert> out;
    for (auto& slot : slots)
        for (auto& alert : slot) out.push_back(std::move(alert));
    return out;
}

double capped_ratio(std::size_t count, std::size_t threshold) {
    const double v = static_cast<double>(count) / (2.0 * static_cast<double>(threshold));
    return std::min(1.0, v);
}

}  // namespace

std::vector<RuleAlert> detect_smurfing(const std::vector<TransferRecord>& transfers,
                                       const SmurfingParams& params, int threads) {
    if (params.min_count == 0 || params.window <= 0)
        throw std::invalid_argument("detect_smurfing: params must be positive");

    std::int64_t max_value = params.max_value;
    if (max_value <= 0 && !transfers.empty()) {
        std::vector<double> values;
        values.reserve(transfers.size());
        for (const auto& t : transfers) values.push_back(static_cast<double>(t.value));
        max_value = static_cast<std::int64_t>(percentile(std::move(values), 10.0));
    }

    return per_wallet(group_events(transfers), threads,
                      [&](const std::string& wallet, const std::vector<std::size_t>& events) {
                          std::vector<std::size_t> small_out;
                          for (std::size_t i : events)
                              if (transfers[i].src == wallet && transfers[i].value <= max_value)
                                  small_out.push_back(i);
                          std::vector<RuleAlert> alerts;
                          for (auto [lo, hi] : qualifying_clusters(transfers, small_out,
                                                                   params.min_count, params.window)) {
                              std::vector<std::size_t> ev(small_out.begin() +
                                                              static_cast<std::ptrdiff_t>(lo),
                                                          small_out.begin() +
                                                              static_cast<std::ptrdiff_t>(hi + 1));
                              alerts.push_back(make_alert(transfers, wallet, RuleKind::Smurfing,
                                                          std::move(ev),
                                                          capped_ratio(hi - lo + 1, params.min_count)));
                          }
                          return alerts;
                      });
}

std::vector<RuleAlert> detect_structuring(const std::vector<TransferRecord>& transfers,
                                          const StructuringParams& params, int threads) {
    if (!(params.band_fraction > 0.0 && params.band_fraction < 1.0))
        throw std::invalid_argument("detect_structuring: band_fraction must be in (0,1)");
    const double lo = static_cast<double>(params.threshold) * (1.0 - params.band_fraction);
    const double hi = static_cast<double>(params.threshold);

    return per_wallet(group_events(transfers), threads,
                      [&](const std::string& wallet, const std::vector<std::size_t>& events) {
                          std::vector<std::size_t> banded;
                          for (std::size_t i : events) {
                              const double v = static_cast<double>(transfers[i].value);
                              if (transfers[i].src == wallet && v >= lo && v < hi)
                                  banded.push_back(i);
                          }
                          std::vector<RuleAlert> alerts;
                          if (banded.size() >= params.min_count) {
                              const double sev = capped_ratio(banded.size(), params.min_count);
                              alerts.push_back(make_alert(transfers, wallet, RuleKind::Structuring,
                                                          std::move(banded), sev));
                          }
                          return alerts;
                      });
}

std::vector<RuleAlert> detect_mixer_contact(const std::vector<TransferRecord>& transfers,
                                            const std::set<std::string>& mixer_addresses,
                                            int threads) {
    if (mixer_addresses.empty()) return {};
    return per_wallet(group_events(transfers), threads,
                      [&](const std::string& wallet, const std::vector<std::size_t>& events) {
                          std::vector<RuleAlert> alerts;
                          if (mixer_addresses.count(wallet)) return alerts;
                          std::vector<std::size_t> touching;
                          for (std::size_t i : events) {
                              const auto& t = transfers[i];
                              const std::string& other = t.src == wallet ? t.dst : t.src;
                              if (mixer_addresses.count(other)) touching.push_back(i);
                          }
                          if (!touching.empty()) {
                              const double share = static_cast<double>(touching.size()) /
                                                   static_cast<double>(events.size());
                              alerts.push_back(make_alert(transfers, wallet, RuleKind::Mixer,
                                                          std::move(touching), share));
                          }
                          return alerts;
                      });
}

std::vector<RuleAlert> detect_fanout_new_addresses(const std::vector<TransferRecord>& transfers,
                                                   const FanoutParams& params, int threads) {
    if (params.min_new == 0 || params.window <= 0)
        throw std::invalid_argument("detect_fanout_new_addresses: params must be positive");

    return per_wallet(
        group_events(transfers), threads,
        [&](const std::string& wallet, const std::vector<std::size_t>& events) {
            // First contacts: outgoing transfers to a counterparty absent from
            // all earlier history (either direction). Each first contact is a
            // distinct new counterparty by construction.
            std::set<std::string> seen;
            std::vector<std::size_t> first_contacts;
            for (std::size_t i : events) {
                const auto& t = transfers[i];
                const std::string& other = t.src == wallet ? t.dst : t.src;
                const bool is_new = seen.insert(other).second;
                if (is_new && t.src == wallet && !t.self_transfer()) first_contacts.push_back(i);
            }
            std::vector<RuleAlert> alerts;
            for (auto [lo, hi] :
                 qualifying_clusters(transfers, first_contacts, params.min_new, params.window)) {
                std::vector<std::size_t> ev(
                    first_contacts.begin() + static_cast<std::ptrdiff_t>(lo),
                    first_contacts.begin() + static_cast<std::ptrdiff_t>(hi + 1));
                alerts.push_back(make_alert(transfers, wallet, RuleKind::Fanout, std::move(ev),
                                            capped_ratio(hi - lo + 1, params.min_new)));
            }
            return alerts;
        });
}

std::vector<RuleAlert> detect_burst_dormancy(const std::vector<TransferRecord>& transfers,
                                             const BurstParams& params, int threads) {
    if (params.burst_count == 0 || params.burst_window <= 0 || params.dormancy_min <= 0)
        throw std::invalid_argument("detect_burst_dormancy: params must be positive");

    return per_wallet(
        group_events(transfers), threads,
        [&](const std::string& wallet, const std::vector<std::size_t>& events) {
            std::vector<RuleAlert> alerts;
            const auto bursts =
                qualifying_clusters(transfers, events, params.burst_count, params.burst_window);
            if (bursts.size() < 2) return alerts;

            // A dormancy gap between adjacent events, with a burst fully
            // before it and another fully after it.
            for (std::size_t p = 0; p + 1 < events.size(); ++p) {
                if (transfers[events[p + 1]].timestamp - transfers[events[p]].timestamp <
                    params.dormancy_min)
                    continue;
                const std::pair<std::size_t, std::size_t>* before = nullptr;
                const std::pair<std::size_t, std::size_t>* after = nullptr;
                for (const auto& b : bursts) {
                    if (b.second <= p) before = &b;
                    if (b.first >= p + 1 && !after) after = &b;
                }
                if (!before || !after) continue;
                std::vector<std::size_t> ev;
                for (std::size_t k = before->first; k <= before->second; ++k)
                    ev.push_back(events[k]);
                for (std::size_t k = after->first; k <= after->second; ++k)
                    ev.push_back(events[k]);
                alerts.push_back(make_alert(transfers, wallet, RuleKind::Burst, std::move(ev), 1.0));
            }
            return alerts;
        });
}

RiskProfile wallet_risk_score(const std::string& wallet, const std::vector<RuleAlert>& alerts,
                              const TransactionGraph& graph,
                              const std::set<std::string>& flagged, const RiskWeights& weights) {
    RiskProfile p;
    p.wallet = wallet;
    auto weight_of = [&](RuleKind rule) {
        switch (rule) {
            case RuleKind::Smurfing: return weights.smurfing;
            case RuleKind::Structuring: return weights.structuring;
            case RuleKind::Mixer: return weights.mixer;
            case RuleKind::Fanout: return weights.fanout;
            case RuleKind::Burst: return weights.burst;
        }
        return 0.0;
    };
    for (const auto& a : alerts) {
        if (a.wallet != wallet) continue;
        p.score += weight_of(a.rule) * a.severity;
        ++p.alert_counts[a.rule];
    }
    if (auto id = graph.node_id(wallet)) {
        const auto& nbrs = graph.neighbors()[*id];
        for (std::size_t v : nbrs)
            if (flagged.count(graph.addresses()[v])) ++p.flagged_neighbor_count;
        p.score += weights.neighbor * static_cast<double>(p.flagged_neighbor_count) /
                   std::max<double>(1.0, static_cast<double>(nbrs.size()));
    }
    return p;
}

std::vector<RuleAlert> scan_all(const std::vector<TransferRecord>& transfers,
                                const std::set<std::string>& mixer_addresses,
                                const RuleParams& params, int threads) {
    std::vector<RuleAlert> all;
    for (auto& batch :
         {detect_smurfing(transfers, params.smurfing, threads),
          detect_structuring(transfers, params.structuring, threads),
          detect_mixer_contact(transfers, mixer_addresses, threads),
          detect_fanout_new_addresses(transfers, params.fanout, threads),
          detect_burst_dormancy(transfers, params.burst, threads)}) {
        for (const auto& a : batch) all.push_back(a);
    }
    std::sort(all.begin(), all.end(), [](const RuleAlert& a, const RuleAlert& b) {
        if (a.wallet != b.wallet) return a.wallet < b.wallet;
        if (a.rule != b.rule) return static_cast<int>(a.rule) < static_cast<int>(b.rule);
        return a.t_start < b.t_start;
    });
    return all;
}

std::string alerts_jsonl(const std::vector<RuleAlert>& alerts) {
    std::ostringstream ss;
    for (const auto& a : alerts) {
        nlohmann::json j{{"wallet", a.wallet},
                         {"rule", to_string(a.rule)},
                         {"window", {{"t_start", a.t_start}, {"t_end", a.t_end}}},
                         {"evidence", a.evidence},
                         {"severity", a.severity}};
        ss << j.dump() << '\n';
    }
    return ss.str();
}

std::string risk_csv(const std::vector<RiskProfile>& profiles) {
    std::ostringstream ss;
    ss << "address,score,smurfing,structuring,mixer,fanout,burst,flagged_neighbors\n";
    auto count = [](const RiskProfile& p, RuleKind k) {
        auto it = p.alert_counts.find(k);
        return it == p.alert_counts.end() ? std::size_t{0} : it->second;
    };
    for (const auto& p : profiles) {
        ss << p.wallet << ',' << fmt_double(p.score) << ',' << count(p, RuleKind::Smurfing) << ','
           << count(p, RuleKind::Structuring) << ',' << count(p, RuleKind::Mixer) << ','
           << count(p, RuleKind::Fanout) << ',' << count(p, RuleKind::Burst) << ','
           << p.flagged_neighbor_count << '\n';
    }
    return ss.str();
}

}  // namespace chainsift
