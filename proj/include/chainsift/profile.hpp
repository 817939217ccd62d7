/// @file profile.hpp
/// @brief Exploratory statistics over wallet columns: correlations, rankings,
///        log transforms, OLS fits, histograms — emitted as plot-ready CSV.
///
/// Conventions used throughout: population (1/n) variance, and zero-variance
/// columns correlate as 0 against everything else so the matrix stays total.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "chainsift/ingest.hpp"

namespace chainsift {

struct SummaryStats {
    double mean = 0;
    double median = 0;
    double variance = 0;  // population, divide by n
    double skewness = 0;  // E[(x-mu)^3]/sigma^3, 0 when sigma == 0
    double min = 0;
    double max = 0;
};

struct CorrelationMatrix {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> r;  // square, symmetric, unit diagonal
};

/// Ordinary least squares y = slope*x + intercept.
struct FitResult {
    double slope = 0;
    double intercept = 0;
    double r = 0;  // Pearson correlation of x,y
    std::size_t n = 0;
};

struct Histogram {
    std::vector<double> edges;       // bins + 1 entries
    std::vector<std::size_t> counts;  // bins entries, sums to n
};

/// Throws std::invalid_argument on an empty vector.
SummaryStats summary_stats(const std::vector<double>& column);

/// Pairwise Pearson r over equal-length named columns (>= 2 rows each).
CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& columns);

/// Top k records by one of the five numeric wallet fields, descending,
/// ties broken by ascending address.
std::vector<std::pair<std::string, std::int64_t>> top_k_by_field(
    const std::vector<WalletRecord>& records, const std::string& field, std::size_t k);

/// Elementwise ln(1 + x); input must be nonnegative.
std::vector<double> log1p_column(const std::vector<double>& column);

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Equal-width bins over [min, max], left-closed, right edge inclusive in the
/// last bin. A constant column degenerates to edges [v, v+1).
Histogram histogram(const std::vector<double>& column, std::size_t bins);

// Plot-data writers. Each returns the exact file content; the pipeline
// decides where it lands.
std::string corr_csv(const CorrelationMatrix& m);
std::string topk_csv(const std::vector<std::pair<std::string, std::int64_t>>& ranked);
std::string hist_csv(const Histogram& h);  // edge_lo,edge_hi,count
std::string fit_csv(const FitResult& f);
std::string scatter_csv(const std::vector<WalletRecord>& records);

}  // namespace chainsift
