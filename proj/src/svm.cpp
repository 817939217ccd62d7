#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chainsift/learn.hpp"
#include "chainsift/rng.hpp"

namespace chainsift {

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& z, double gamma) {
    if (x.size() != z.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

namespace {

// Kernel values between training rows; the full matrix is precomputed when it
// fits, otherwise rows are rebuilt on demand.
class KernelTable {
public:
    KernelTable(const FeatureMatrix& X, double gamma) : X_(X), gamma_(gamma), n_(X.rows()) {
        if (n_ * n_ <= kCacheEntries) {
            cache_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double v = rbf_kernel(X.values[i], X.values[j], gamma_);
                    cache_[i * n_ + j] = v;
                    cache_[j * n_ + i] = v;
                }
        }
    }

    double at(std::size_t i, std::size_t j) const {
        if (!cache_.empty()) return cache_[i * n_ + j];
        return rbf_kernel(X_.values[i], X_.values[j], gamma_);
    }

    void row(std::size_t i, std::vector<double>& out) const {
        out.resize(n_);
        if (!cache_.empty()) {
            std::copy(cache_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                      cache_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_), out.begin());
            return;
        }
        for (std::size_t k = 0; k < n_; ++k) out[k] = rbf_kernel(X_.values[i], X_.values[k], gamma_);
    }

private:
    static constexpr std::size_t kCacheEntries = 16u * 1024u * 1024u;  // 128 MB of doubles
    const FeatureMatrix& X_;
    double gamma_;
    std::size_t n_;
    std::vector<double> cache_;
};

// Optimality is measured bias-free, LIBSVM style. With g(x) the decision
// value without bias and s_k = y_k - g(x_k), any feasible bias must satisfy
//   b >= s_k for k in the up set   (alpha can still grow "upward")
//   b <= s_k for k in the down set (alpha can still grow "downward")
// so the state is optimal when max_up(s) <= min_down(s); the midpoint of that
// interval is the bias reported with the model, and half the gap bounds every
// per-sample KKT complementarity violation.
struct GapScan {
    double max_up = -std::numeric_limits<double>::infinity();
    double min_down = std::numeric_limits<double>::infinity();

    double gap() const { return max_up - min_down; }
    double bias() const { return 0.5 * (max_up + min_down); }
};

GapScan scan_gap(const std::vector<double>& alpha, const std::vector<double>& error,
                 const std::vector<double>& y, double c) {
    GapScan g;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const double s = -error[k];  // error = g - y, so s = y - g
        const bool in_up = (y[k] > 0 && alpha[k] < c) || (y[k] < 0 && alpha[k] > 0);
        const bool in_down = (y[k] < 0 && alpha[k] < c) || (y[k] > 0 && alpha[k] > 0);
        if (in_up) g.max_up = std::max(g.max_up, s);
        if (in_down) g.min_down = std::min(g.min_down, s);
    }
    return g;
}

}  // namespace

SvmModel train_svm(const FeatureMatrix& X, const std::vector<int>& y01, const SvmConfig& config,
                   std::uint64_t seed) {
    const std::size_t n = X.rows();
    if (n != y01.size()) throw std::invalid_argument("train_svm: X/y size mismatch");
    if (n < 2) throw std::invalid_argument("train_svm: need >= 2 samples");
    const bool has0 = std::find(y01.begin(), y01.end(), 0) != y01.end();
    const bool has1 = std::find(y01.begin(), y01.end(), 1) != y01.end();
    if (!has0 || !has1) throw std::invalid_argument("train_svm: degenerate labels");
    if (config.c <= 0) throw std::invalid_argument("train_svm: C must be > 0");
    if (config.tol <= 0) throw std::invalid_argument("train_svm: tol must be > 0");

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = y01[i] == 1 ? 1.0 : -1.0;

    double gamma = config.gamma;
    if (gamma <= 0) {
        // scale rule: 1 / (p * mean column variance)
        const auto stats = fit_standardizer(X);
        double mean_var = 0;
        for (double s : stats.stddev) mean_var += s * s;
        mean_var /= static_cast<double>(X.cols());
        gamma = mean_var > 0 ? 1.0 / (static_cast<double>(X.cols()) * mean_var)
                             : 1.0 / static_cast<double>(X.cols());
    }

    const KernelTable kernel(X, gamma);
    const double C = config.c;
    const double tol = config.tol;
    Rng rng(derive_seed(seed, "smo"));

    std::vector<double> alpha(n, 0.0);
    std::vector<double> error(n);  // g(x_k) - y_k, bias-free
    for (std::size_t i = 0; i < n; ++i) error[i] = -y[i];

    std::vector<double> row_i, row_j;
    std::vector<char> stuck(n, 0);  // violators that made no progress since the last update

    // Snap bound-hugging multipliers to the exact bound so floating-point
    // dust cannot keep a sample in the up/down sets with no room to move.
    const double snap = 1e-10 * C;
    auto snapped = [&](double a) {
        if (a < snap) return 0.0;
        if (a > C - snap) return C;
        return a;
    };

    auto try_update = [&](std::size_t i) -> bool {
        auto attempt = [&](std::size_t j) -> bool {
            if (j == i) return false;
            const double kii = kernel.at(i, i);
            const double kjj = kernel.at(j, j);
            const double kij = kernel.at(i, j);
            const double eta = kii + kjj - 2.0 * kij;

            const double ai = alpha[i], aj = alpha[j];
            const double s = y[i] * y[j];
            double lo, hi;
            if (y[i] != y[j]) {
                lo = std::max(0.0, aj - ai);
                hi = std::min(C, C + aj - ai);
            } else {
                lo = std::max(0.0, ai + aj - C);
                hi = std::min(C, ai + aj);
            }
            if (lo >= hi) return false;

            double aj_new;
            if (eta > 1e-15) {
                aj_new = std::clamp(aj + y[j] * (error[i] - error[j]) / eta, lo, hi);
            } else {
                // Degenerate pair (duplicate rows): the subproblem is linear
                // in alpha_j, so the optimum sits at an interval end.
                const double gi = error[i] + y[i];
                const double gj = error[j] + y[j];
                const double vi = gi - ai * y[i] * kii - aj * y[j] * kij;
                const double vj = gj - ai * y[i] * kij - aj * y[j] * kjj;
                auto objective = [&](double a2) {
                    const double a1 = ai + s * (aj - a2);
                    return 0.5 * a1 * a1 * kii + 0.5 * a2 * a2 * kjj + s * a1 * a2 * kij +
                           y[i] * a1 * vi + y[j] * a2 * vj - a1 - a2;
                };
                const double lo_obj = objective(lo);
                const double hi_obj = objective(hi);
                if (lo_obj < hi_obj - 1e-12)
                    aj_new = lo;
                else if (hi_obj < lo_obj - 1e-12)
                    aj_new = hi;
                else
                    return false;
            }
            aj_new = snapped(aj_new);
            if (std::abs(aj_new - aj) < 1e-12) return false;
            const double ai_new = snapped(ai + s * (aj - aj_new));

            kernel.row(i, row_i);
            kernel.row(j, row_j);
            const double di = y[i] * (ai_new - ai);
            const double dj = y[j] * (aj_new - aj);
            alpha[i] = ai_new;
            alpha[j] = aj_new;
            for (std::size_t k = 0; k < n; ++k) error[k] += di * row_i[k] + dj * row_j[k];
            return true;
        };

        // Second index: random non-bound first, then a full scan from a
        // random offset.
        std::vector<std::size_t> non_bound;
        for (std::size_t k = 0; k < n; ++k)
            if (k != i && alpha[k] > 0 && alpha[k] < C) non_bound.push_back(k);
        if (!non_bound.empty()) {
            const std::size_t j = non_bound[rng.next_below(non_bound.size())];
            if (attempt(j)) return true;
        }
        const std::size_t start = static_cast<std::size_t>(rng.next_below(n));
        for (std::size_t off = 0; off < n; ++off) {
            if (attempt((start + off) % n)) return true;
        }
        return false;
    };

    SvmModel m;
    m.config = config;
    m.seed = seed;
    m.n_features = X.cols();
    m.gamma = gamma;

    for (std::size_t pass = 0; pass < config.max_passes && !m.converged; ++pass) {
        m.passes = pass + 1;
        bool progressed = false;
        for (std::size_t step = 0; step < n; ++step) {
            const auto gap = scan_gap(alpha, error, y, C);
            if (gap.gap() <= tol) {
                m.converged = true;
                break;
            }
            // Most-violating sample relative to the midpoint bias, skipping
            // ones that proved immovable since the last successful update.
            const double b_mid = gap.bias();
            std::size_t best = n;
            double best_v = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (stuck[k]) continue;
                const double s = -error[k];
                const bool in_up = (y[k] > 0 && alpha[k] < C) || (y[k] < 0 && alpha[k] > 0);
                const bool in_down = (y[k] < 0 && alpha[k] < C) || (y[k] > 0 && alpha[k] > 0);
                double v = 0;
                if (in_up) v = std::max(v, s - b_mid);
                if (in_down) v = std::max(v, b_mid - s);
                if (v > best_v) {
                    best_v = v;
                    best = k;
                }
            }
            if (best == n) break;  // every remaining violator is stuck
            if (try_update(best)) {
                progressed = true;
                std::fill(stuck.begin(), stuck.end(), char(0));
            } else {
                stuck[best] = 1;
            }
        }
        if (!m.converged) {
            std::fill(stuck.begin(), stuck.end(), char(0));
            if (!progressed) break;  // numerically pinned; gap recorded below
        }
    }

    const auto final_gap = scan_gap(alpha, error, y, C);
    m.bias = final_gap.bias();
    m.max_kkt_violation = std::max(0.0, 0.5 * final_gap.gap());
    if (final_gap.gap() <= tol) m.converged = true;

    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0) {
            m.support_vectors.push_back(X.values[k]);
            m.coeffs.push_back(alpha[k] * y[k]);
        }
    }
    return m;
}

std::vector<int> predict_labels(const SvmModel& m, const FeatureMatrix& X) {
    auto scores = decision_scores(m, X);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > 0 ? 1 : 0;
    return out;
}

std::vector<double> decision_scores(const SvmModel& m, const FeatureMatrix& X) {
    if (X.cols() != m.n_features)
        throw std::invalid_argument("svm predict: feature width mismatch");
    std::vector<double> out(X.rows(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double f = m.bias;
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s)
            f += m.coeffs[s] * rbf_kernel(m.support_vectors[s], X.values[i], m.gamma);
        out[i] = f;
    }
    return out;
}

}  // namespace chainsift
