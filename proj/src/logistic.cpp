#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chainsift/learn.hpp"

namespace chainsift {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_labels(const FeatureMatrix& X, const std::vector<int>& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("train_logistic: X/y size mismatch");
    if (X.rows() == 0) throw std::invalid_argument("train_logistic: empty matrix");
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (!has0 || !has1) throw std::invalid_argument("train_logistic: degenerate labels");
}

}  // namespace

double logistic_loss(const FeatureMatrix& X, const std::vector<int>& y,
                     const std::vector<double>& weights, double bias, double l2) {
    const double n = static_cast<double>(X.rows());
    double loss = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double z = bias;
        for (std::size_t c = 0; c < X.cols(); ++c) z += weights[c] * X.values[i][c];
        // -(y ln s + (1-y) ln(1-s)) == softplus(z) - y z
        loss += softplus(z) - static_cast<double>(y[i]) * z;
    }
    loss /= n;
    double w2 = 0;
    for (double w : weights) w2 += w * w;
    return loss + (l2 / (2.0 * n)) * w2;
}

std::vector<double> logistic_gradient(const FeatureMatrix& X, const std::vector<int>& y,
                                      const std::vector<double>& weights, double bias,
                                      double l2) {
    const double n = static_cast<double>(X.rows());
    std::vector<double> grad(X.cols() + 1, 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double z = bias;
        for (std::size_t c = 0; c < X.cols(); ++c) z += weights[c] * X.values[i][c];
        const double err = sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t c = 0; c < X.cols(); ++c) grad[c] += err * X.values[i][c];
        grad[X.cols()] += err;
    }
    for (auto& g : grad) g /= n;
    for (std::size_t c = 0; c < X.cols(); ++c) grad[c] += (l2 / n) * weights[c];
    return grad;
}

LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const LogisticConfig& config, std::uint64_t seed) {
    check_labels(X, y);
    if (config.learning_rate <= 0) throw std::invalid_argument("train_logistic: learning_rate > 0");
    if (config.tol <= 0) throw std::invalid_argument("train_logistic: tol > 0");

    LogisticModel m;
    m.config = config;
    m.seed = seed;
    m.weights.assign(X.cols(), 0.0);
    m.bias = 0.0;

    double lr = config.learning_rate;
    double loss = logistic_loss(X, y, m.weights, m.bias, config.l2);

    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        const auto grad = logistic_gradient(X, y, m.weights, m.bias, config.l2);
        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < config.tol) {
            m.converged = true;
            break;
        }

        // Halve the step until the loss stops increasing; the halved rate
        // sticks for later iterations.
        std::vector<double> w_next(X.cols());
        double b_next = 0, loss_next = 0;
        while (true) {
            for (std::size_t c = 0; c < X.cols(); ++c) w_next[c] = m.weights[c] - lr * grad[c];
            b_next = m.bias - lr * grad[X.cols()];
            loss_next = logistic_loss(X, y, w_next, b_next, config.l2);
            if (loss_next <= loss || lr < 1e-15) break;
            lr *= 0.5;
        }
        if (lr < 1e-15) break;  // stalled
        m.weights = std::move(w_next);
        m.bias = b_next;
        loss = loss_next;
        m.iterations = iter + 1;
    }
    m.final_loss = loss;
    return m;
}

std::vector<int> predict_labels(const LogisticModel& m, const FeatureMatrix& X) {
    auto scores = decision_scores(m, X);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= 0.5 ? 1 : 0;
    return out;
}

std::vector<double> decision_scores(const LogisticModel& m, const FeatureMatrix& X) {
    if (X.cols() != m.weights.size())
        throw std::invalid_argument("logistic predict: feature width mismatch");
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double z = m.bias;
        for (std::size_t c = 0; c < X.cols(); ++c) z += m.weights[c] * X.values[i][c];
        out[i] = sigmoid(z);
    }
    return out;
}

}  // namespace chainsift
