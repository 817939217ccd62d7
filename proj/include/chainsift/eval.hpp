/// @file eval.hpp
/// @brief Confusion-matrix metrics, classification reports, ROC-AUC,
///        stratified splitting / k-fold CV, and the F1-ranked model table.
///
/// Zero-denominator convention everywhere: precision, recall and F1 are 0
/// when their denominator is 0.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainsift/learn.hpp"

namespace chainsift {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

struct Metrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

/// Classification report in the usual layout: per-class rows plus macro
/// (unweighted) and weighted (support-weighted) averages.
struct ClassReport {
    struct PerClass {
        double precision = 0;
        double recall = 0;
        double f1 = 0;
        std::int64_t support = 0;
    };
    struct Avg {
        double precision = 0;
        double recall = 0;
        double f1 = 0;
    };
    PerClass class0;
    PerClass class1;
    double accuracy = 0;
    Avg macro;
    Avg weighted;
};

/// One comparison-table row; metrics are for class 1 (the suspicious class),
/// accuracy is global.
struct ComparisonRow {
    std::string model;
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

Metrics metrics_from_confusion(const ConfusionMatrix& cm);

ClassReport classification_report(const std::vector<int>& y_true,
                                  const std::vector<int>& y_pred);
ClassReport report_from_confusion(const ConfusionMatrix& cm);

/// Fixed-width text rendering with 2-decimal cells.
std::string render_report_text(const ClassReport& r);

/// Probability a random positive outscores a random negative, ties counted
/// half (Mann-Whitney). Throws when only one class is present.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Stratified three-way split. Per class: val and test get their rounded
/// quotas, train gets the remainder. Deterministic per seed.
SplitIndices stratified_split(const std::vector<int>& labels, double train_ratio,
                              double val_ratio, double test_ratio, std::uint64_t seed);

/// The 70/15/15 split used throughout the pipeline.
inline SplitIndices split_70_15_15(const std::vector<int>& labels, std::uint64_t seed) {
    return stratified_split(labels, 0.70, 0.15, 0.15, seed);
}

/// k disjoint covering folds, per-fold class counts within floor/ceil of
/// class_count / k. Deterministic per seed.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed);

struct CvMetrics {
    double accuracy = 0;
    double precision = 0;  // class 1
    double recall = 0;     // class 1
    double f1 = 0;         // class 1
    double auc = 0;
};

struct CvResult {
    std::vector<ClassReport> fold_reports;
    std::vector<double> fold_auc;
    CvMetrics mean;
    CvMetrics stddev;  // population
};

/// Train on k-1 folds, evaluate on the held-out fold. The standardizer is
/// fit on the training portion only, and applied for the model kinds that
/// expect scaled inputs (logistic, svm).
CvResult cross_validate(const FeatureMatrix& X, const std::vector<int>& y,
                        const ModelConfig& config, std::size_t k, std::uint64_t seed,
                        int threads = 0);

/// Rows sorted by F1 descending, ties by name ascending.
std::vector<ComparisonRow> compare_models(
    const std::vector<std::tuple<std::string, std::vector<int>, std::vector<int>>>& results);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);  // 6-decimal cells
std::string report_json(const std::string& model, const ConfusionMatrix& cm,
                        const ClassReport& report, double auc);

}  // namespace chainsift
