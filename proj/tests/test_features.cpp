#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "chainsift/features.hpp"
#include "chainsift/rng.hpp"

using namespace chainsift;

TEST_CASE("activity intensity cases") {
    CHECK(activity_intensity(0, 0) == 0.0);
    CHECK(activity_intensity(7, 0) == 7.0);
    CHECK(activity_intensity(50, 499) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("activity intensity is finite and increasing in n_tx") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = static_cast<std::int64_t>(rng.next_below(1'000'000'000));
        const auto n = static_cast<std::int64_t>(rng.next_below(100000));
        const double a = activity_intensity(n, r);
        const double b = activity_intensity(n + 1, r);
        CHECK(std::isfinite(a));
        CHECK(b > a);
    }
}

TEST_CASE("descending ranks with and without ties") {
    CHECK(rank_descending({30, 10, 20}) == std::vector<double>{1, 3, 2});
    CHECK(rank_descending({5, 5, 1}) == std::vector<double>{1.5, 1.5, 3});
    CHECK(rank_descending({}).empty());
}

TEST_CASE("rank sum is n(n+1)/2 for arbitrary inputs") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v;
        const std::size_t n = 1 + rng.next_below(60);
        for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<double>(rng.next_below(10)));
        const auto ranks = rank_descending(v);
        const double sum = std::accumulate(ranks.begin(), ranks.end(), 0.0);
        CHECK(sum == doctest::Approx(static_cast<double>(n * (n + 1)) / 2.0));
    }
}

TEST_CASE("percentile with linear interpolation") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(percentile(v, 25) == doctest::Approx(25.75));
    CHECK(percentile(v, 0) == 1.0);
    CHECK(percentile(v, 100) == 100.0);
}

namespace {

std::vector<TransferRecord> wallet_transfers(const std::vector<std::int64_t>& times,
                                             const std::string& wallet = "w") {
    std::vector<TransferRecord> ts;
    for (auto t : times) ts.push_back({t, wallet, "other", 100});
    return ts;
}

}  // namespace

TEST_CASE("transaction frequency tiles windows from the first event") {
    auto ts = wallet_transfers({1, 11, 21});  // t=0,10,20 offset by epoch start 1
    auto freq = transaction_frequency(ts, "w", 15);
    CHECK(freq == std::vector<std::int64_t>{2, 1});
}

TEST_CASE("absent wallet has empty frequency") {
    CHECK(transaction_frequency(wallet_transfers({1, 2}), "nope", 10).empty());
}

TEST_CASE("all transfers in one window") {
    auto freq = transaction_frequency(wallet_transfers({5, 6, 7, 8}), "w", 1000);
    CHECK(freq == std::vector<std::int64_t>{4});
}

TEST_CASE("frequency counts conserve the wallet event count") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<TransferRecord> ts;
        const std::size_t n = 1 + rng.next_below(80);
        std::int64_t t = 1;
        for (std::size_t i = 0; i < n; ++i) {
            t += static_cast<std::int64_t>(rng.next_below(5000));
            const bool incoming = rng.next_below(2) == 0;
            ts.push_back({t, incoming ? "peer" : "w", incoming ? "w" : "peer", 10});
        }
        const auto freq = transaction_frequency(ts, "w", 3600);
        CHECK(std::accumulate(freq.begin(), freq.end(), std::int64_t{0}) ==
              static_cast<std::int64_t>(n));
    }
}

TEST_CASE("amount profile of a single transfer") {
    std::vector<TransferRecord> ts{{10, "w", "x", 100}};
    auto p = amount_profile(ts, "w", 90, 10);
    CHECK(p.mean == 100.0);
    CHECK(p.variance == 0.0);
    CHECK(p.median == 100.0);
    CHECK(p.sent_count == 1.0);
    CHECK(p.recv_count == 0.0);
}

TEST_CASE("wallet above the global large cutoff everywhere has frac_large 1") {
    std::vector<TransferRecord> ts;
    std::int64_t t = 1;
    for (int i = 1; i <= 100; ++i) ts.push_back({++t, "bg", "bg2", i});
    ts.push_back({++t, "w", "x", 5000});
    ts.push_back({++t, "w", "x", 6000});
    auto p = amount_profile(ts, "w", 90, 10);
    CHECK(p.frac_large == 1.0);
}

TEST_CASE("frac_small against the uniform 1..100 background") {
    std::vector<TransferRecord> ts;
    std::int64_t t = 1;
    // global values: wallet's own 1,2,3,4 plus 96 fillers 5..100 -> 1..100
    for (std::int64_t v = 1; v <= 4; ++v) ts.push_back({++t, "w", "x", v});
    for (std::int64_t v = 5; v <= 100; ++v) ts.push_back({++t, "bg", "bg2", v});
    auto p = amount_profile(ts, "w", 90, 25);
    // P25 of 1..100 is 25.75; all four wallet values sit below it
    CHECK(p.frac_small == 1.0);
}

TEST_CASE("absent wallet yields an all-zero profile") {
    std::vector<TransferRecord> ts{{10, "a", "b", 100}};
    auto p = amount_profile(ts, "nope", 90, 10);
    CHECK(p.mean == 0.0);
    CHECK(p.sent_count == 0.0);
}

TEST_CASE("standardizer fit on 1,2,3") {
    FeatureMatrix m;
    m.row_ids = {"a", "b", "c"};
    m.column_names = {"x"};
    m.values = {{1}, {2}, {3}};
    auto stats = fit_standardizer(m);
    CHECK(stats.mean[0] == doctest::Approx(2.0));
    CHECK(stats.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));

    auto z = apply_standardizer(m, stats);
    CHECK(z.values[0][0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(z.values[1][0] == doctest::Approx(0.0));
    CHECK(z.values[2][0] == doctest::Approx(1.224744871391589).epsilon(1e-12));
}

TEST_CASE("standardized columns have mean 0 and population std 1") {
    Rng rng(31);
    FeatureMatrix m;
    m.column_names = {"a", "b"};
    for (int i = 0; i < 50; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        m.values.push_back({rng.normal(5, 3), rng.normal(-2, 8)});
    }
    auto z = apply_standardizer(m, fit_standardizer(m));
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0;
        for (const auto& row : z.values) mean += row[c];
        mean /= 50;
        double var = 0;
        for (const auto& row : z.values) var += (row[c] - mean) * (row[c] - mean);
        var /= 50;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
    }
}

TEST_CASE("constant columns standardize to zero and single rows have zero std") {
    FeatureMatrix m;
    m.row_ids = {"a", "b"};
    m.column_names = {"x"};
    m.values = {{7}, {7}};
    auto stats = fit_standardizer(m);
    CHECK(stats.stddev[0] == 0.0);
    auto z = apply_standardizer(m, stats);
    CHECK(z.values[0][0] == 0.0);

    FeatureMatrix single;
    single.row_ids = {"a"};
    single.column_names = {"x", "y"};
    single.values = {{3, 9}};
    auto s2 = fit_standardizer(single);
    CHECK(s2.stddev[0] == 0.0);
    CHECK(s2.stddev[1] == 0.0);
}

TEST_CASE("standardize inverts where std > 0") {
    Rng rng(41);
    FeatureMatrix m;
    m.column_names = {"a"};
    for (int i = 0; i < 30; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        m.values.push_back({rng.normal(100, 25)});
    }
    auto stats = fit_standardizer(m);
    auto z = apply_standardizer(m, stats);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double back = stats.stddev[0] * z.values[i][0] + stats.mean[0];
        CHECK(std::abs(back - m.values[i][0]) < 1e-9);
    }
}

TEST_CASE("apply rejects column mismatch") {
    FeatureMatrix m;
    m.row_ids = {"a"};
    m.column_names = {"x", "y"};
    m.values = {{1, 2}};
    StandardizerStats stats{{0.0}, {1.0}};
    CHECK_THROWS_AS(apply_standardizer(m, stats), std::invalid_argument);
}

namespace {

std::vector<WalletRecord> two_records() {
    return {{"a", "f0", 5, 1, 1000, 400, 600, 1}, {"b", "f1", 2, 0, 50, 10, 40, 0}};
}

}  // namespace

TEST_CASE("assemble: records only gives the 9 documented columns") {
    auto m = assemble_features(two_records(), nullptr, nullptr);
    CHECK(m.cols() == 9);
    CHECK(m.column_names[0] == "n_tx");
    CHECK(m.column_names[8] == "activity_intensity");
    CHECK(m.rows() == 2);
    CHECK(m.row_ids == std::vector<std::string>{"a", "b"});
    REQUIRE(m.labels.has_value());
    CHECK((*m.labels)[0] == 1);
    // spot-check derived cells
    CHECK(m.values[0][5] == doctest::Approx(std::log1p(1000.0)));
    CHECK(m.values[0][8] == doctest::Approx(5.0 / 1001.0));
}

TEST_CASE("assemble: with graph scores gives 12 columns, absent wallets get 0") {
    CentralityBundle cb;
    cb.degree.score = {{"a", 0.5}};
    cb.closeness.score = {{"a", 0.25}};
    cb.betweenness.score = {{"a", 3.0}};
    auto m = assemble_features(two_records(), nullptr, &cb);
    CHECK(m.cols() == 12);
    CHECK(m.values[0][9] == 0.5);
    CHECK(m.values[0][11] == 3.0);
    CHECK(m.values[1][9] == 0.0);  // b absent from the graph
    CHECK(m.values[1][11] == 0.0);
}

TEST_CASE("assemble: with transfers gives 19 columns and fills profiles") {
    std::vector<TransferRecord> ts{{100, "a", "b", 10}, {200, "a", "b", 20}, {5000, "b", "a", 30}};
    auto m = assemble_features(two_records(), &ts, nullptr);
    CHECK(m.cols() == 19);
    const auto at = [&](const std::string& col, std::size_t row) {
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.column_names[c] == col) return m.values[row][c];
        FAIL("no column");
        return 0.0;
    };
    CHECK(at("sent_count", 0) == 2.0);
    CHECK(at("recv_count", 0) == 1.0);
    CHECK(at("amt_mean", 0) == doctest::Approx(20.0));
    CHECK(at("freq_mean", 0) > 0.0);
}

TEST_CASE("assemble rejects duplicate addresses and partial labels") {
    auto recs = two_records();
    recs.push_back(recs[0]);
    CHECK_THROWS_AS(assemble_features(recs, nullptr, nullptr), std::invalid_argument);

    auto partial = two_records();
    partial[1].label.reset();
    CHECK_THROWS_AS(assemble_features(partial, nullptr, nullptr), std::invalid_argument);
}

TEST_CASE("assemble row order is input record order and thread-count independent") {
    std::vector<WalletRecord> recs;
    std::vector<TransferRecord> ts;
    Rng rng(53);
    for (int i = 0; i < 60; ++i) {
        const std::string addr = "w" + std::to_string((i * 37) % 97);
        recs.push_back({addr, "h", i, 0, 10 * i, i, 9 * i, {}});
        ts.push_back({static_cast<std::int64_t>(1 + rng.next_below(100000)), addr,
                      "w" + std::to_string(rng.next_below(60)), 1 + static_cast<std::int64_t>(rng.next_below(999))});
    }
    std::stable_sort(ts.begin(), ts.end(),
                     [](const TransferRecord& a, const TransferRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    auto m1 = assemble_features(recs, &ts, nullptr, {}, 1);
    auto m8 = assemble_features(recs, &ts, nullptr, {}, 8);
    CHECK(m1.values == m8.values);
    for (std::size_t i = 0; i < recs.size(); ++i) CHECK(m1.row_ids[i] == recs[i].address);
}

TEST_CASE("feature csv and manifest shapes") {
    auto m = assemble_features(two_records(), nullptr, nullptr);
    const auto csv = features_csv(m);
    CHECK(csv.rfind("address,n_tx,", 0) == 0);
    CHECK(csv.find(",label\n") != std::string::npos);
    const auto manifest = feature_manifest_json(m);
    CHECK(manifest.find("\"columns\"") != std::string::npos);
    CHECK(manifest.find("\"has_labels\": true") != std::string::npos);
}
