#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chainsift/learn.hpp"
#include "chainsift/rng.hpp"

namespace chainsift {

double gini_impurity(std::int64_t count0, std::int64_t count1) {
    const double n = static_cast<double>(count0 + count1);
    if (n == 0) return 0.0;
    const double p0 = static_cast<double>(count0) / n;
    const double p1 = static_cast<double>(count1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

struct TreeBuilder {
    const FeatureMatrix& X;
    const std::vector<int>& y;
    const ForestConfig& cfg;
    Rng& rng;
    DecisionTree tree;

    // Candidate feature indices for one split, drawn without replacement.
    std::vector<std::size_t> draw_features() {
        const std::size_t p = X.cols();
        std::size_t k = p;
        if (cfg.features_per_split == SplitFeatures::Sqrt)
            k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
        std::vector<std::size_t> pool(p);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.next_below(p - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0;
        double gini = 0;
    };

    Split best_split(const std::vector<std::size_t>& sample) {
        Split best;
        const auto features = draw_features();
        std::vector<std::size_t> order(sample.size());

        for (std::size_t f : features) {
            order = sample;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X.values[a][f] < X.values[b][f];
            });

            std::int64_t total1 = 0;
            for (std::size_t i : order) total1 += y[i];
            const auto total = static_cast<std::int64_t>(order.size());

            std::int64_t left_n = 0, left1 = 0;
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                ++left_n;
                left1 += y[order[pos]];
                const double lo = X.values[order[pos]][f];
                const double hi = X.values[order[pos + 1]][f];
                if (lo == hi) continue;  // threshold only between distinct values
                const std::int64_t right_n = total - left_n;
                if (static_cast<std::size_t>(left_n) < cfg.min_leaf ||
                    static_cast<std::size_t>(right_n) < cfg.min_leaf)
                    continue;
                const std::int64_t right1 = total1 - left1;
                const double w =
                    (static_cast<double>(left_n) * gini_impurity(left_n - left1, left1) +
                     static_cast<double>(right_n) * gini_impurity(right_n - right1, right1)) /
                    static_cast<double>(total);
                if (!best.found || w < best.gini) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (lo + hi);
                    best.gini = w;
                }
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> sample, std::size_t depth) {
        std::int64_t c1 = 0;
        for (std::size_t i : sample) c1 += y[i];
        const auto c0 = static_cast<std::int64_t>(sample.size()) - c1;

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[static_cast<std::size_t>(node_id)].counts = {c0, c1};

        const bool pure = c0 == 0 || c1 == 0;
        const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
        if (pure || depth_capped || sample.size() < 2 * cfg.min_leaf)
            return node_id;

        const auto split = best_split(sample);
        if (!split.found) return node_id;  // candidates were constant here

        std::vector<std::size_t> left, right;
        for (std::size_t i : sample) {
            (X.values[i][split.feature] <= split.threshold ? left : right).push_back(i);
        }
        sample.clear();
        sample.shrink_to_fit();

        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }
};

DecisionTree train_tree(const FeatureMatrix& X, const std::vector<int>& y,
                        const ForestConfig& cfg, std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    const std::size_t n = X.rows();
    std::vector<std::size_t> bootstrap(n);
    for (auto& i : bootstrap) i = static_cast<std::size_t>(rng.next_below(n));

    TreeBuilder builder{X, y, cfg, rng, {}};
    builder.build(std::move(bootstrap), 0);
    return std::move(builder.tree);
}

}  // namespace

DecisionTree train_decision_tree(const FeatureMatrix& X, const std::vector<int>& y,
                                 const ForestConfig& config, std::uint64_t seed) {
    if (X.rows() != y.size() || X.rows() == 0)
        throw std::invalid_argument("train_decision_tree: bad inputs");
    Rng rng(seed);
    std::vector<std::size_t> all(X.rows());
    std::iota(all.begin(), all.end(), 0);
    TreeBuilder builder{X, y, config, rng, {}};
    builder.build(std::move(all), 0);
    return std::move(builder.tree);
}

int DecisionTree::predict(const std::vector<double>& row) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
        at = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[at].feature)] <=
                                              nodes[at].threshold
                                          ? nodes[at].left
                                          : nodes[at].right);
    }
    return nodes[at].counts[1] > nodes[at].counts[0] ? 1 : 0;
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    // depth via explicit stack of (node, depth)
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes[at].feature >= 0) {
            stack.push_back({static_cast<std::size_t>(nodes[at].left), d + 1});
            stack.push_back({static_cast<std::size_t>(nodes[at].right), d + 1});
        }
    }
    return best;
}

ForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                                const ForestConfig& config, std::uint64_t seed, int threads) {
    if (X.rows() != y.size())
        throw std::invalid_argument("train_random_forest: X/y size mismatch");
    if (X.rows() < 2) throw std::invalid_argument("train_random_forest: need >= 2 samples");
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (!has0 || !has1) throw std::invalid_argument("train_random_forest: degenerate labels");
    if (config.n_trees < 1) throw std::invalid_argument("train_random_forest: n_trees >= 1");

    ForestModel m;
    m.config = config;
    m.seed = seed;
    m.n_features = X.cols();
    m.trees.resize(config.n_trees);

    // Each tree owns a seed derived from (seed, index); the result is
    // identical no matter how the loop is scheduled.
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(config.n_trees); ++t) {
        m.trees[static_cast<std::size_t>(t)] =
            train_tree(X, y, config, derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
    }
    return m;
}

std::vector<int> predict_labels(const ForestModel& m, const FeatureMatrix& X) {
    auto scores = decision_scores(m, X);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = scores[i] > 0.5 ? 1 : 0;  // exact tie votes 0
    return out;
}

std::vector<double> decision_scores(const ForestModel& m, const FeatureMatrix& X) {
    if (m.trees.empty()) throw std::invalid_argument("forest predict: empty model");
    if (X.cols() != m.n_features)
        throw std::invalid_argument("forest predict: feature width mismatch");
    std::vector<double> out(X.rows(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        std::size_t votes1 = 0;
        for (const auto& tree : m.trees)
            votes1 += static_cast<std::size_t>(tree.predict(X.values[i]));
        out[i] = static_cast<double>(votes1) / static_cast<double>(m.trees.size());
    }
    return out;
}

}  // namespace chainsift
