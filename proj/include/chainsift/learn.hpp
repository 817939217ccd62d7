/// @file learn.hpp
/// @brief From-scratch binary classifiers: logistic regression (full-batch
///        gradient descent), random forest (bootstrapped CART, Gini splits),
///        and an RBF-kernel SVM trained by SMO.
///
/// Training is deterministic for a fixed seed: every stochastic choice draws
/// from a stream derived via derive_seed, and forest trees are seeded
/// per-index so the result is identical for any worker count.
///
/// Caller contract on scaling: logistic regression and the SVM expect
/// standardized features; the forest takes raw features (splits are
/// scale-invariant).

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "chainsift/features.hpp"

namespace chainsift {

enum class ModelKind { Logistic, Forest, Svm };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct LogisticConfig {
    double learning_rate = 0.1;
    double l2 = 1.0;
    std::size_t max_iters = 1000;
    double tol = 1e-6;  // stop when the max-norm of the gradient drops below
};

enum class SplitFeatures { Sqrt, All };

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;  // 0 = unbounded
    std::size_t min_leaf = 1;
    SplitFeatures features_per_split = SplitFeatures::Sqrt;
};

struct SvmConfig {
    double c = 1.0;
    double gamma = 0.0;  // <= 0 selects the scale rule 1/(p * mean column variance)
    double tol = 1e-3;
    std::size_t max_passes = 200;  // each pass attempts up to n pair updates
};

struct ModelConfig {
    ModelKind kind = ModelKind::Logistic;
    std::uint64_t seed = 42;
    LogisticConfig logistic;
    ForestConfig forest;
    SvmConfig svm;
};

struct LogisticModel {
    LogisticConfig config;
    std::uint64_t seed = 0;  // reserved; the solver itself is deterministic
    std::vector<double> weights;
    double bias = 0;
    std::size_t iterations = 0;
    double final_loss = 0;
    bool converged = false;
};

/// Binary CART tree. Internal nodes route `feature <= threshold` left;
/// leaves hold class counts.
struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0;
        int left = -1;
        int right = -1;
        std::array<std::int64_t, 2> counts{0, 0};
    };
    std::vector<Node> nodes;  // nodes[0] is the root

    /// Leaf majority; ties vote 0.
    int predict(const std::vector<double>& row) const;
    std::size_t depth() const;
};

struct ForestModel {
    ForestConfig config;
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;
};

struct SvmModel {
    SvmConfig config;
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coeffs;  // alpha_i * y_i, one per support vector
    double bias = 0;
    double gamma = 0;  // resolved value actually used
    bool converged = false;
    std::size_t passes = 0;
    double max_kkt_violation = 0;  // diagnostic at exit
};

using TrainedModel = std::variant<LogisticModel, ForestModel, SvmModel>;

/// exp(-gamma * ||x - z||^2); throws on dimension mismatch.
double rbf_kernel(const std::vector<double>& x, const std::vector<double>& z, double gamma);

LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const LogisticConfig& config, std::uint64_t seed = 0);

/// Negative log-likelihood plus L2 penalty, the quantity the solver descends.
double logistic_loss(const FeatureMatrix& X, const std::vector<int>& y,
                     const std::vector<double>& weights, double bias, double l2);

/// Gradient of logistic_loss; returns {d/dweights..., d/dbias} appended.
std::vector<double> logistic_gradient(const FeatureMatrix& X, const std::vector<int>& y,
                                      const std::vector<double>& weights, double bias, double l2);

ForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                                const ForestConfig& config, std::uint64_t seed, int threads = 0);

/// 1 - sum p_c^2 over the two classes.
double gini_impurity(std::int64_t count0, std::int64_t count1);

/// One CART tree grown on all rows (no bootstrap); the seed only drives
/// per-split feature sampling.
DecisionTree train_decision_tree(const FeatureMatrix& X, const std::vector<int>& y,
                                 const ForestConfig& config, std::uint64_t seed);

SvmModel train_svm(const FeatureMatrix& X, const std::vector<int>& y, const SvmConfig& config,
                   std::uint64_t seed);

/// Dispatcher over ModelConfig.kind.
TrainedModel train_model(const FeatureMatrix& X, const std::vector<int>& y,
                         const ModelConfig& config, int threads = 0);

std::vector<int> predict_labels(const LogisticModel& m, const FeatureMatrix& X);
std::vector<int> predict_labels(const ForestModel& m, const FeatureMatrix& X);
std::vector<int> predict_labels(const SvmModel& m, const FeatureMatrix& X);
std::vector<int> predict_labels(const TrainedModel& m, const FeatureMatrix& X);

/// Logistic: sigmoid probability; forest: fraction of trees voting 1;
/// SVM: raw decision value.
std::vector<double> decision_scores(const LogisticModel& m, const FeatureMatrix& X);
std::vector<double> decision_scores(const ForestModel& m, const FeatureMatrix& X);
std::vector<double> decision_scores(const SvmModel& m, const FeatureMatrix& X);
std::vector<double> decision_scores(const TrainedModel& m, const FeatureMatrix& X);

// Versioned JSON serialization; doubles survive bit-exact.
std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const std::string& text);

}  // namespace chainsift
