#include "chainsift/fixture.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "chainsift/rng.hpp"

namespace chainsift {

namespace {

constexpr std::int64_t kEpoch = 1'600'000'000;
constexpr std::int64_t kDay = 24 * 3600;

std::string wallet_address(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%06zu", i);
    return buf;
}

// 40-hex pseudo hash160, a pure function of the address.
std::string synth_hash160(const std::string& address) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(address);
    std::string out;
    out.reserve(40);
    for (int block = 0; block < 3; ++block) {
        h = mix64(h);
        for (int i = 0; i < 16 && out.size() < 40; ++i) {
            out.push_back(digits[(h >> (4 * i)) & 0xf]);
        }
    }
    return out;
}

// Log-normal satoshi amount, resampled out of the default structuring band
// so background traffic cannot trip that detector.
std::int64_t benign_value(Rng& rng) {
    while (true) {
        const double v = rng.lognormal(11.0, 1.2);
        auto sat = static_cast<std::int64_t>(v);
        if (sat < 1) sat = 1;
        if (sat >= 9000 && sat < 10000) continue;
        return sat;
    }
}

}  // namespace

Fixture generate_fixture(const FixtureParams& params) {
    const std::size_t n_planted = params.planted.total();
    if (n_planted > params.n_wallets)
        throw std::invalid_argument("generate_fixture: more planted wallets than wallets");
    const std::size_t n_benign = params.n_wallets - n_planted;
    if (n_benign < 20)
        throw std::invalid_argument("generate_fixture: need at least 20 benign wallets");

    Fixture fx;
    for (std::size_t i = 0; i < 3; ++i) fx.mixers.push_back("mixer" + std::to_string(i));

    // Role assignment over a shuffled wallet order keeps planted wallets
    // spread across the address space.
    std::vector<std::size_t> order(params.n_wallets);
    std::iota(order.begin(), order.end(), 0);
    {
        Rng rng(derive_seed(params.seed, "roles"));
        rng.shuffle(order);
    }
    std::vector<RuleKind> role_of;  // aligned with `order` prefix
    auto take = [&](RuleKind kind, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) role_of.push_back(kind);
    };
    take(RuleKind::Smurfing, params.planted.smurfing);
    take(RuleKind::Structuring, params.planted.structuring);
    take(RuleKind::Mixer, params.planted.mixer);
    take(RuleKind::Fanout, params.planted.fanout);
    take(RuleKind::Burst, params.planted.burst);

    std::vector<int> label(params.n_wallets, 0);
    std::vector<std::size_t> benign_ids;
    for (std::size_t i = 0; i < params.n_wallets; ++i) {
        if (i < role_of.size()) {
            label[order[i]] = 1;
            fx.planted[role_of[i]].push_back(wallet_address(order[i]));
        } else {
            benign_ids.push_back(order[i]);
        }
    }
    std::sort(benign_ids.begin(), benign_ids.end());
    for (auto& [rule, wallets] : fx.planted) std::sort(wallets.begin(), wallets.end());

    std::vector<TransferRecord> transfers;
    auto emit = [&](std::int64_t t, std::size_t src, std::size_t dst, std::int64_t value) {
        transfers.push_back({t, wallet_address(src), wallet_address(dst), value});
    };

    // Benign background: per-wallet Poisson event counts; inter-event gaps
    // are floored at 2h so no window-based rule can accumulate.
    {
        Rng rng(derive_seed(params.seed, "benign"));
        const double mean_events =
            static_cast<double>(params.n_benign_transfers) / static_cast<double>(n_benign);
        for (std::size_t w : benign_ids) {
            const auto k = rng.poisson(mean_events);
            std::int64_t t = kEpoch + static_cast<std::int64_t>(rng.uniform(0, 14.0 * kDay));
            for (std::uint64_t e = 0; e < k; ++e) {
                t += 7200 + static_cast<std::int64_t>(rng.exponential(6.0 * 3600));
                std::size_t dst = w;
                while (dst == w) dst = benign_ids[rng.next_below(benign_ids.size())];
                emit(t, w, dst, benign_value(rng));
            }
        }
    }

    // Planted patterns, one rule per wallet.
    {
        Rng rng(derive_seed(params.seed, "planted"));
        auto pick_benign = [&](std::size_t exclude) {
            std::size_t v = exclude;
            while (v == exclude) v = benign_ids[rng.next_below(benign_ids.size())];
            return v;
        };
        for (std::size_t i = 0; i < role_of.size(); ++i) {
            const std::size_t w = order[i];
            const std::int64_t start =
                kEpoch + 7 * kDay + static_cast<std::int64_t>(rng.uniform(0, 50.0 * kDay));
            switch (role_of[i]) {
                case RuleKind::Smurfing: {
                    // 20 identical sub-threshold sends inside one hour, few
                    // counterparties. One constant value keeps the whole
                    // block at or below the global P10 cutoff no matter how
                    // the fixture is sized: if the percentile lands inside
                    // the block it interpolates to exactly this value.
                    constexpr std::int64_t kSmurfValue = 700;
                    std::array<std::size_t, 3> targets{pick_benign(w), pick_benign(w),
                                                       pick_benign(w)};
                    std::int64_t t = start;
                    for (int e = 0; e < 20; ++e) {
                        t += 60 + static_cast<std::int64_t>(rng.uniform(0, 90));
                        emit(t, w, targets[static_cast<std::size_t>(e) % targets.size()],
                             kSmurfValue);
                    }
                    break;
                }
                case RuleKind::Structuring: {
                    std::int64_t t = start;
                    for (int e = 0; e < 4; ++e) {
                        t += static_cast<std::int64_t>(rng.uniform(0.5 * kDay, 2.0 * kDay));
                        emit(t, w, pick_benign(w),
                             9550 + static_cast<std::int64_t>(rng.next_below(401)));
                    }
                    break;
                }
                case RuleKind::Mixer: {
                    std::int64_t t = start;
                    for (int e = 0; e < 2; ++e) {
                        t += static_cast<std::int64_t>(rng.uniform(3600, 2.0 * kDay));
                        transfers.push_back({t, wallet_address(w),
                                             fx.mixers[rng.next_below(fx.mixers.size())],
                                             benign_value(rng)});
                    }
                    for (int e = 0; e < 2; ++e) {
                        t += static_cast<std::int64_t>(rng.uniform(3600, 2.0 * kDay));
                        emit(t, w, pick_benign(w), benign_value(rng));
                    }
                    break;
                }
                case RuleKind::Fanout: {
                    // 15 first contacts inside one day.
                    std::vector<std::size_t> pool = benign_ids;
                    Rng shuffle_rng(rng.next_u64());
                    shuffle_rng.shuffle(pool);
                    std::int64_t t = start;
                    for (int e = 0; e < 15; ++e) {
                        t += 4000 + static_cast<std::int64_t>(rng.uniform(0, 1400));
                        emit(t, w, pool[static_cast<std::size_t>(e)], benign_value(rng));
                    }
                    break;
                }
                case RuleKind::Burst: {
                    std::array<std::size_t, 3> targets{pick_benign(w), pick_benign(w),
                                                       pick_benign(w)};
                    std::int64_t t = start;
                    for (int half = 0; half < 2; ++half) {
                        for (int e = 0; e < 25; ++e) {
                            t += 2400 + static_cast<std::int64_t>(rng.uniform(0, 480));
                            emit(t, w, targets[static_cast<std::size_t>(e) % targets.size()],
                                 benign_value(rng));
                        }
                        t += 20 * kDay;  // dormancy between the two bursts
                    }
                    break;
                }
            }
        }
    }

    // Pre-fund every sender from a pool of mint addresses. Each mint serves
    // at most 8 wallets, which keeps any mint under every detector threshold;
    // mint addresses are not part of the wallet population.
    {
        Rng rng(derive_seed(params.seed, "funding"));
        std::vector<std::int64_t> outgoing(params.n_wallets, 0);
        std::vector<std::int64_t> first_event(params.n_wallets, 0);
        std::unordered_map<std::string, std::size_t> id_of;
        for (std::size_t i = 0; i < params.n_wallets; ++i) id_of[wallet_address(i)] = i;
        for (const auto& t : transfers) {
            auto it = id_of.find(t.src);
            if (it == id_of.end()) continue;
            outgoing[it->second] += t.value;
            if (first_event[it->second] == 0 || t.timestamp < first_event[it->second])
                first_event[it->second] = t.timestamp;
        }
        std::size_t funded = 0;
        for (std::size_t w = 0; w < params.n_wallets; ++w) {
            if (outgoing[w] == 0) continue;
            const std::string mint = "mint" + std::to_string(funded / 8);
            ++funded;
            const std::int64_t t =
                first_event[w] - static_cast<std::int64_t>(rng.uniform(1.0 * kDay, 3.0 * kDay));
            const std::int64_t value =
                outgoing[w] + 50000 + static_cast<std::int64_t>(rng.next_below(100001));
            transfers.push_back({t, mint, wallet_address(w), value});
        }
    }

    std::stable_sort(transfers.begin(), transfers.end(),
                     [](const TransferRecord& a, const TransferRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    fx.transfers = std::move(transfers);

    // Wallet summary rows derived from the final log; totals are sums by
    // construction and every balance is nonnegative thanks to the funding.
    {
        std::vector<std::int64_t> received(params.n_wallets, 0), sent(params.n_wallets, 0);
        std::vector<std::int64_t> in_count(params.n_wallets, 0), out_count(params.n_wallets, 0);
        std::vector<std::int64_t> n_tx(params.n_wallets, 0);
        std::unordered_map<std::string, std::size_t> id_of;
        for (std::size_t i = 0; i < params.n_wallets; ++i) id_of[wallet_address(i)] = i;
        for (const auto& t : fx.transfers) {
            auto s = id_of.find(t.src);
            auto d = id_of.find(t.dst);
            if (s != id_of.end()) {
                sent[s->second] += t.value;
                ++out_count[s->second];
                ++n_tx[s->second];
            }
            if (d != id_of.end()) {
                received[d->second] += t.value;
                ++in_count[d->second];
                if (s == id_of.end() || s->second != d->second) ++n_tx[d->second];
            }
        }
        fx.records.reserve(params.n_wallets);
        for (std::size_t w = 0; w < params.n_wallets; ++w) {
            WalletRecord r;
            r.address = wallet_address(w);
            r.hash160 = synth_hash160(r.address);
            r.n_tx = n_tx[w];
            r.n_unredeemed = std::max<std::int64_t>(0, in_count[w] - out_count[w]);
            r.total_received = received[w];
            r.total_sent = sent[w];
            r.final_balance = received[w] - sent[w];
            r.label = label[w];
            fx.records.push_back(std::move(r));
        }
    }
    return fx;
}

}  // namespace chainsift
