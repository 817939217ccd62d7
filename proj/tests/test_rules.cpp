#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "chainsift/fixture.hpp"
#include "chainsift/rng.hpp"
#include "chainsift/rules.hpp"

using namespace chainsift;

namespace {

std::vector<TransferRecord> sorted(std::vector<TransferRecord> ts) {
    std::stable_sort(ts.begin(), ts.end(),
                     [](const TransferRecord& a, const TransferRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return ts;
}

std::set<std::string> alerted(const std::vector<RuleAlert>& alerts) {
    std::set<std::string> out;
    for (const auto& a : alerts) out.insert(a.wallet);
    return out;
}

}  // namespace

TEST_CASE("smurfing: burst of small sends inside one window") {
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 20; ++i)
        ts.push_back({1000 + i * 120, "w", "t" + std::to_string(i % 3), 1000});
    ts.push_back({100000, "w", "t0", 999999});  // large later transfer, irrelevant
    SmurfingParams params;
    params.min_count = 10;
    params.max_value = 5000;
    params.window = 3600;
    auto alerts = detect_smurfing(sorted(ts), params);
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].wallet == "w");
    CHECK(alerts[0].rule == RuleKind::Smurfing);
    CHECK(alerts[0].evidence.size() == 20);
    CHECK(alerts[0].severity == 1.0);  // 20 = 2 * min_count caps the scale
}

TEST_CASE("smurfing: too few qualifying transfers is silent") {
    std::vector<TransferRecord> ts{{1000, "w", "a", 100}, {1100, "w", "b", 100}};
    SmurfingParams params;
    params.max_value = 5000;
    CHECK(detect_smurfing(sorted(ts), params).empty());
}

TEST_CASE("smurfing: window is closed on both ends") {
    SmurfingParams params;
    params.min_count = 3;
    params.max_value = 100;
    params.window = 1000;
    // exactly min_count transfers, the last precisely at t_start + window
    std::vector<TransferRecord> ts{{5000, "w", "a", 50}, {5500, "w", "b", 50},
                                   {6000, "w", "c", 50}};
    auto alerts = detect_smurfing(sorted(ts), params);
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].t_start == 5000);
    CHECK(alerts[0].t_end == 6000);

    // one second past the window: no alert
    ts[2].timestamp = 6001;
    CHECK(detect_smurfing(sorted(ts), params).empty());
}

TEST_CASE("smurfing: incoming transfers never count") {
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 20; ++i) ts.push_back({1000 + i * 60, "payer", "w", 100});
    SmurfingParams params;
    params.max_value = 5000;
    auto alerts = detect_smurfing(sorted(ts), params);
    CHECK(alerted(alerts).count("w") == 0);
}

TEST_CASE("structuring: values just under the threshold") {
    std::vector<TransferRecord> ts{{100, "w", "a", 9800},
                                   {20000, "w", "b", 9900},
                                   {40000, "w", "c", 9750}};
    StructuringParams params;  // threshold 10000, band 5%, min_count 3
    auto alerts = detect_structuring(sorted(ts), params);
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].evidence.size() == 3);

    // all at or above the threshold: the band excludes them
    for (auto& t : ts) t.value = 10000;
    CHECK(detect_structuring(sorted(ts), params).empty());
}

TEST_CASE("structuring: band boundary arithmetic") {
    StructuringParams params;
    params.min_count = 1;
    // 9400 sits below threshold*(1-0.05) = 9500 and is excluded
    std::vector<TransferRecord> ts{{100, "w", "a", 9400}};
    CHECK(detect_structuring(sorted(ts), params).empty());
    ts[0].value = 9500;
    CHECK(detect_structuring(sorted(ts), params).size() == 1);
    ts[0].value = 9999;
    CHECK(detect_structuring(sorted(ts), params).size() == 1);
}

TEST_CASE("mixer contact: direct touch alerts, listed services do not") {
    std::vector<TransferRecord> ts{{100, "a", "m", 500}, {200, "b", "c", 100}};
    auto alerts = detect_mixer_contact(sorted(ts), {"m"});
    CHECK(alerted(alerts) == std::set<std::string>{"a"});

    CHECK(detect_mixer_contact(sorted(ts), {}).empty());
}

TEST_CASE("mixer severity is the wallet's mixer share") {
    std::vector<TransferRecord> ts;
    ts.push_back({100, "w", "m", 500});
    for (int i = 1; i < 10; ++i) ts.push_back({100 + i * 50, "w", "p" + std::to_string(i), 100});
    auto alerts = detect_mixer_contact(sorted(ts), {"m"});
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].severity == doctest::Approx(0.1));
}

TEST_CASE("fanout: many first contacts inside a day") {
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 15; ++i)
        ts.push_back({10000 + i * 3000, "w", "new" + std::to_string(i), 700});
    FanoutParams params;
    auto alerts = detect_fanout_new_addresses(sorted(ts), params);
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].wallet == "w");
    CHECK(alerts[0].evidence.size() == 15);
}

TEST_CASE("fanout: repeat counterparties and prior history do not count") {
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 15; ++i) ts.push_back({10000 + i * 3000, "w", "same", 700});
    FanoutParams params;
    CHECK(detect_fanout_new_addresses(sorted(ts), params).empty());

    // counterparties met slowly over weeks, then contacted densely later:
    // nothing in the dense cluster is new
    ts.clear();
    for (int i = 0; i < 15; ++i)
        ts.push_back({100 + i * 2 * 24 * 3600, "w", "known" + std::to_string(i), 700});
    for (int i = 0; i < 15; ++i)
        ts.push_back({9000000 + i * 3000, "w", "known" + std::to_string(i), 700});
    CHECK(detect_fanout_new_addresses(sorted(ts), params).empty());
}

TEST_CASE("fanout: incoming history blocks newness") {
    std::vector<TransferRecord> ts;
    ts.push_back({100, "peer0", "w", 700});  // w saw peer0 as a payer
    for (int i = 0; i < 10; ++i)
        ts.push_back({50000 + i * 1000, "w", "peer" + std::to_string(i), 700});
    FanoutParams params;
    params.min_new = 10;
    // only 9 of the 10 counterparties are new
    CHECK(detect_fanout_new_addresses(sorted(ts), params).empty());
}

TEST_CASE("burst-dormancy: burst, long silence, burst") {
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 50; ++i) ts.push_back({100000 + i * 1000, "w", "a", 500});
    const std::int64_t resume = 100000 + 50 * 1000 + 30 * 24 * 3600;
    for (int i = 0; i < 50; ++i) ts.push_back({resume + i * 1000, "w", "b", 500});
    BurstParams params;
    auto alerts = detect_burst_dormancy(sorted(ts), params);
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].wallet == "w");
    CHECK(alerts[0].evidence.size() == 100);
}

TEST_CASE("burst-dormancy: uniform activity and single bursts are silent") {
    BurstParams params;
    std::vector<TransferRecord> uniform;
    for (int i = 0; i < 200; ++i) uniform.push_back({100000 + i * 7200, "w", "a", 500});
    CHECK(detect_burst_dormancy(sorted(uniform), params).empty());

    std::vector<TransferRecord> single;
    for (int i = 0; i < 50; ++i) single.push_back({100000 + i * 600, "w", "a", 500});
    CHECK(detect_burst_dormancy(sorted(single), params).empty());
}

TEST_CASE("detectors are monotone: adding qualifying evidence keeps the alert") {
    SmurfingParams params;
    params.min_count = 3;
    params.max_value = 100;
    params.window = 1000;
    std::vector<TransferRecord> ts{{5000, "w", "a", 50}, {5400, "w", "b", 50},
                                   {5800, "w", "c", 50}};
    auto base = detect_smurfing(sorted(ts), params);
    REQUIRE(base.size() == 1);
    ts.push_back({5600, "w", "d", 50});
    auto more = detect_smurfing(sorted(ts), params);
    REQUIRE(more.size() == 1);
    CHECK(more[0].evidence.size() == 4);
    CHECK(more[0].severity >= base[0].severity);
}

TEST_CASE("detectors are independent of raw input order") {
    Rng rng(12);
    std::vector<TransferRecord> ts;
    for (int i = 0; i < 30; ++i)
        ts.push_back({1000 + i * 200, "w", "t" + std::to_string(i), 50});
    auto shuffled = ts;
    rng.shuffle(shuffled);

    FanoutParams params;
    auto a = detect_fanout_new_addresses(sorted(ts), params);
    auto b = detect_fanout_new_addresses(sorted(shuffled), params);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].wallet == b[i].wallet);
        CHECK(a[i].t_start == b[i].t_start);
        CHECK(a[i].evidence.size() == b[i].evidence.size());
    }
}

TEST_CASE("risk score: weighted alerts plus flagged neighbors") {
    auto graph = build_graph({{100, "w", "n1", 10}, {200, "w", "n2", 10}});

    RiskWeights weights;
    CHECK(wallet_risk_score("w", {}, graph, {}, weights).score == 0.0);

    RuleAlert a;
    a.wallet = "w";
    a.rule = RuleKind::Smurfing;
    a.severity = 1.0;
    weights.smurfing = 2.0;
    weights.neighbor = 0.0;
    auto p = wallet_risk_score("w", {a}, graph, {}, weights);
    CHECK(p.score == doctest::Approx(2.0));
    CHECK(p.alert_counts.at(RuleKind::Smurfing) == 1);

    // adding a flagged neighbor never decreases the score
    weights.neighbor = 1.5;
    auto p2 = wallet_risk_score("w", {a}, graph, {"n1"}, weights);
    CHECK(p2.score >= p.score);
    CHECK(p2.flagged_neighbor_count == 1);
    CHECK(p2.score == doctest::Approx(2.0 + 1.5 * 0.5));
}

TEST_CASE("risk score is additive over disjoint alert sets") {
    auto graph = build_graph({{100, "w", "n1", 10}});
    RiskWeights weights;
    RuleAlert a;
    a.wallet = "w";
    a.rule = RuleKind::Fanout;
    a.severity = 0.5;
    RuleAlert b;
    b.wallet = "w";
    b.rule = RuleKind::Burst;
    b.severity = 1.0;
    const double sa = wallet_risk_score("w", {a}, graph, {}, weights).score;
    const double sb = wallet_risk_score("w", {b}, graph, {}, weights).score;
    const double sab = wallet_risk_score("w", {a, b}, graph, {}, weights).score;
    CHECK(sab == doctest::Approx(sa + sb));
}

TEST_CASE("alerts jsonl carries the documented fields") {
    RuleAlert a;
    a.wallet = "w";
    a.rule = RuleKind::Structuring;
    a.t_start = 10;
    a.t_end = 20;
    a.evidence = {1, 4};
    a.severity = 0.5;
    const auto line = alerts_jsonl({a});
    for (const char* key :
         {"\"wallet\"", "\"rule\"", "\"structuring\"", "\"window\"", "\"t_start\"", "\"evidence\"",
          "\"severity\""})
        CHECK(line.find(key) != std::string::npos);
}

// ---------------------------------------------------------------------------
// fixture obligations
// ---------------------------------------------------------------------------

TEST_CASE("fixture: wallet summaries satisfy the totals-from-transfers identities") {
    FixtureParams params;
    params.n_wallets = 200;
    params.n_benign_transfers = 1200;
    params.planted = {8, 8, 8, 8, 8};
    params.seed = 7;
    auto fx = generate_fixture(params);
    REQUIRE(fx.records.size() == 200);

    std::map<std::string, std::int64_t> received, sent, n_tx;
    for (const auto& t : fx.transfers) {
        sent[t.src] += t.value;
        received[t.dst] += t.value;
        n_tx[t.src] += 1;
        if (!t.self_transfer()) n_tx[t.dst] += 1;
    }
    for (const auto& r : fx.records) {
        CHECK(r.total_received == received[r.address]);
        CHECK(r.total_sent == sent[r.address]);
        CHECK(r.final_balance == r.total_received - r.total_sent);
        CHECK(r.final_balance >= 0);
        CHECK(r.n_tx == n_tx[r.address]);
        CHECK(r.hash160.size() == 40);
    }

    // transfers are sorted and positive
    for (std::size_t i = 1; i < fx.transfers.size(); ++i)
        CHECK(fx.transfers[i - 1].timestamp <= fx.transfers[i].timestamp);
    for (const auto& t : fx.transfers) CHECK(t.value > 0);
}

TEST_CASE("fixture: deterministic per seed, different across seeds") {
    FixtureParams params;
    params.n_wallets = 100;
    params.n_benign_transfers = 500;
    params.planted = {3, 3, 3, 3, 3};
    params.seed = 11;
    auto a = generate_fixture(params);
    auto b = generate_fixture(params);
    CHECK(a.transfers == b.transfers);
    CHECK(a.records == b.records);
    params.seed = 12;
    auto c = generate_fixture(params);
    CHECK(a.transfers != c.transfers);
}

TEST_CASE("fixture: zero planted means all labels 0") {
    FixtureParams params;
    params.n_wallets = 60;
    params.n_benign_transfers = 300;
    params.planted = {0, 0, 0, 0, 0};
    auto fx = generate_fixture(params);
    for (const auto& r : fx.records) CHECK(r.label == 0);
    CHECK(fx.planted.empty());
}

TEST_CASE("fixture: infeasible params are rejected") {
    FixtureParams params;
    params.n_wallets = 40;
    params.planted = {10, 10, 10, 10, 10};  // 50 planted > 40 wallets
    CHECK_THROWS_AS(generate_fixture(params), std::invalid_argument);
    params.n_wallets = 60;  // only 10 benign left, need 20
    CHECK_THROWS_AS(generate_fixture(params), std::invalid_argument);
}

TEST_CASE("fixture: every detector has recall 1.0 on its planted wallets and stays"
          " silent on benign ones") {
    FixtureParams params;  // defaults: 1000 wallets, 50 per rule
    params.seed = 42;
    auto fx = generate_fixture(params);

    std::set<std::string> benign;
    for (const auto& r : fx.records)
        if (r.label == 0) benign.insert(r.address);

    RuleParams rules;
    std::map<RuleKind, std::vector<RuleAlert>> alerts;
    alerts[RuleKind::Smurfing] = detect_smurfing(fx.transfers, rules.smurfing);
    alerts[RuleKind::Structuring] = detect_structuring(fx.transfers, rules.structuring);
    alerts[RuleKind::Mixer] =
        detect_mixer_contact(fx.transfers, {fx.mixers.begin(), fx.mixers.end()});
    alerts[RuleKind::Fanout] = detect_fanout_new_addresses(fx.transfers, rules.fanout);
    alerts[RuleKind::Burst] = detect_burst_dormancy(fx.transfers, rules.burst);

    for (const auto& [rule, planted] : fx.planted) {
        const auto hit = alerted(alerts.at(rule));
        for (const auto& wallet : planted) CHECK(hit.count(wallet) == 1);  // recall 1.0
    }
    for (const auto& [rule, list] : alerts)
        for (const auto& a : list) {
            CHECK(benign.count(a.wallet) == 0);
            // no alert on infrastructure addresses either
            CHECK(a.wallet.rfind("mint", 0) != 0);
            CHECK(a.wallet.rfind("mixer", 0) != 0);
        }
}

TEST_CASE("fixture: recall margins hold across seeds and sizes") {
    for (std::uint64_t seed : {1u, 9u, 77u, 2026u}) {
        FixtureParams params;
        params.n_wallets = 500;
        params.n_benign_transfers = 3000;
        params.planted = {20, 20, 20, 20, 20};
        params.seed = seed;
        auto fx = generate_fixture(params);

        std::set<std::string> benign;
        for (const auto& r : fx.records)
            if (r.label == 0) benign.insert(r.address);

        RuleParams rules;
        std::map<RuleKind, std::vector<RuleAlert>> alerts;
        alerts[RuleKind::Smurfing] = detect_smurfing(fx.transfers, rules.smurfing);
        alerts[RuleKind::Structuring] = detect_structuring(fx.transfers, rules.structuring);
        alerts[RuleKind::Mixer] =
            detect_mixer_contact(fx.transfers, {fx.mixers.begin(), fx.mixers.end()});
        alerts[RuleKind::Fanout] = detect_fanout_new_addresses(fx.transfers, rules.fanout);
        alerts[RuleKind::Burst] = detect_burst_dormancy(fx.transfers, rules.burst);

        for (const auto& [rule, planted] : fx.planted) {
            const auto hit = alerted(alerts.at(rule));
            std::size_t found = 0;
            for (const auto& wallet : planted) found += hit.count(wallet);
            CHECK_MESSAGE(found == planted.size(),
                          to_string(rule) << " seed " << seed << ": " << found << "/"
                                          << planted.size());
        }
        for (const auto& [rule, list] : alerts)
            for (const auto& a : list) CHECK(benign.count(a.wallet) == 0);
    }
}

TEST_CASE("fixture: pure-benign background trips nothing") {
    FixtureParams params;
    params.n_wallets = 400;
    params.n_benign_transfers = 2400;
    params.planted = {0, 0, 0, 0, 0};
    params.seed = 42;
    auto fx = generate_fixture(params);

    RuleParams rules;
    CHECK(detect_smurfing(fx.transfers, rules.smurfing).empty());
    CHECK(detect_structuring(fx.transfers, rules.structuring).empty());
    CHECK(detect_mixer_contact(fx.transfers, {fx.mixers.begin(), fx.mixers.end()}).empty());
    CHECK(detect_fanout_new_addresses(fx.transfers, rules.fanout).empty());
    CHECK(detect_burst_dormancy(fx.transfers, rules.burst).empty());
}

TEST_CASE("scan_all merges sorted by wallet, rule, window") {
    FixtureParams params;
    params.n_wallets = 150;
    params.n_benign_transfers = 700;
    params.planted = {5, 5, 5, 5, 5};
    params.seed = 3;
    auto fx = generate_fixture(params);
    auto alerts =
        scan_all(fx.transfers, {fx.mixers.begin(), fx.mixers.end()}, RuleParams{});
    CHECK(alerts.size() >= 25);
    for (std::size_t i = 1; i < alerts.size(); ++i) {
        const auto& a = alerts[i - 1];
        const auto& b = alerts[i];
        const bool ordered = a.wallet < b.wallet ||
                             (a.wallet == b.wallet && static_cast<int>(a.rule) < static_cast<int>(b.rule)) ||
                             (a.wallet == b.wallet && a.rule == b.rule && a.t_start <= b.t_start);
        CHECK(ordered);
    }
    // detection results do not depend on the worker cap
    auto alerts8 = scan_all(fx.transfers, {fx.mixers.begin(), fx.mixers.end()}, RuleParams{}, 8);
    REQUIRE(alerts8.size() == alerts.size());
    for (std::size_t i = 0; i < alerts.size(); ++i) {
        CHECK(alerts[i].wallet == alerts8[i].wallet);
        CHECK(alerts[i].evidence == alerts8[i].evidence);
        CHECK(alerts[i].severity == alerts8[i].severity);
    }
}
