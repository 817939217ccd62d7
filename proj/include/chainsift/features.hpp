/// @file features.hpp
/// @brief Model-input feature engineering: per-wallet activity and amount
///        profiles, ranks, standardization, and matrix assembly.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainsift/ingest.hpp"
#include "chainsift/txgraph.hpp"

namespace chainsift {

/// Dense named feature matrix with aligned optional labels.
struct FeatureMatrix {
    std::vector<std::string> row_ids;  // wallet addresses, input record order
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> values;  // [row][col]
    std::optional<std::vector<int>> labels;

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return column_names.size(); }
};

/// Per-column mean and population std captured from one (training) matrix.
struct StandardizerStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct AmountProfile {
    double mean = 0;
    double median = 0;
    double variance = 0;   // population
    double frac_large = 0;  // share of values above the global large cutoff
    double frac_small = 0;  // share of values below the global small cutoff
    double sent_count = 0;
    double recv_count = 0;
};

struct FeatureConfig {
    std::int64_t frequency_window = 7 * 24 * 3600;  // per-week counts
    double large_pct = 90.0;
    double small_pct = 10.0;
};

/// n_tx / (total_received + 1); always finite.
double activity_intensity(std::int64_t n_tx, std::int64_t total_received);

/// Descending ranks, largest value -> rank 1, ties get the average of the
/// ranks they span. Sum of ranks is always n(n+1)/2.
std::vector<double> rank_descending(const std::vector<double>& values);

/// Linear-interpolation percentile (inclusive: pct 0 -> min, 100 -> max;
/// rank h = (n-1)*pct/100, value interpolated between the two bracketing
/// order statistics).
double percentile(std::vector<double> values, double pct);

/// Per-window transfer counts for one wallet (as src or dst), windows tiled
/// from the wallet's first event. Empty when the wallet never appears.
std::vector<std::int64_t> transaction_frequency(const std::vector<TransferRecord>& transfers,
                                                const std::string& wallet,
                                                std::int64_t window);

/// Value statistics for one wallet's transfers plus the share of globally
/// large / small amounts. All-zero when the wallet never appears.
AmountProfile amount_profile(const std::vector<TransferRecord>& transfers,
                             const std::string& wallet, double large_pct, double small_pct);

StandardizerStats fit_standardizer(const FeatureMatrix& m);

/// (x - mean) / std per column; columns with std == 0 map to 0.
FeatureMatrix apply_standardizer(const FeatureMatrix& m, const StandardizerStats& stats);

struct CentralityBundle {
    NodeScores degree;
    NodeScores closeness;
    NodeScores betweenness;
};

/// Assemble the model-input matrix. Column order (fixed):
///   n_tx, n_unredeemed, total_received, total_sent, final_balance,
///   log1p_total_received, log1p_total_sent, log1p_final_balance,
///   activity_intensity,
/// then with transfers:
///   freq_mean, freq_max, freq_var, amt_mean, amt_median, amt_var,
///   frac_large, frac_small, sent_count, recv_count,
/// then with graph scores:
///   degree, closeness, betweenness.
/// Wallets missing from the transfer log or the graph get 0 in those columns.
/// Labels are copied when every record carries one.
FeatureMatrix assemble_features(const std::vector<WalletRecord>& records,
                                const std::vector<TransferRecord>* transfers,
                                const CentralityBundle* graph_scores,
                                const FeatureConfig& config = {}, int threads = 0);

std::string features_csv(const FeatureMatrix& m);
std::string feature_manifest_json(const FeatureMatrix& m);

}  // namespace chainsift
