// Benchmark: OpenMP kernels against their serial references on a synthetic
// transaction graph. Prints one line per kernel with both timings.
//
//   chainsift_bench [n_wallets] [n_benign_transfers] [threads]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "chainsift/fixture.hpp"
#include "chainsift/learn.hpp"
#include "chainsift/txgraph.hpp"

using namespace chainsift;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double timed(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return seconds_since(t0);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_wallets = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 3000;
    std::size_t n_transfers = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 8 * n_wallets;
    int threads = argc > 3 ? std::atoi(argv[3]) : omp_get_max_threads();

    FixtureParams params;
    params.n_wallets = n_wallets;
    params.n_benign_transfers = n_transfers;
    params.seed = 7;
    const auto fx = generate_fixture(params);
    const auto graph = build_graph(fx.transfers);

    std::printf("graph: %zu nodes, %zu edges, %d threads\n", graph.node_count(),
                graph.edge_count(), threads);

    NodeScores serial, parallel;
    const double t_clo_s = timed([&] { serial = closeness_centrality_serial(graph); });
    const double t_clo_p = timed([&] { parallel = closeness_centrality(graph, threads); });
    double max_diff = 0;
    for (const auto& [addr, score] : serial.score)
        max_diff = std::max(max_diff, std::abs(score - parallel.score.at(addr)));
    std::printf("closeness    serial %8.3fs   omp %8.3fs   speedup %.2fx   max|diff| %g\n",
                t_clo_s, t_clo_p, t_clo_s / t_clo_p, max_diff);

    const double t_btw_s = timed([&] { serial = betweenness_centrality_serial(graph); });
    const double t_btw_p = timed([&] { parallel = betweenness_centrality(graph, threads); });
    max_diff = 0;
    for (const auto& [addr, score] : serial.score)
        max_diff = std::max(max_diff, std::abs(score - parallel.score.at(addr)));
    std::printf("betweenness  serial %8.3fs   omp %8.3fs   speedup %.2fx   max|diff| %g\n",
                t_btw_s, t_btw_p, t_btw_s / t_btw_p, max_diff);

    // Forest training: same seed, 1 thread vs N; models must serialize
    // identically.
    FeatureMatrix X = assemble_features(fx.records, &fx.transfers, nullptr, {}, threads);
    std::vector<int> y = *X.labels;
    ForestConfig fc;
    fc.n_trees = 50;
    ForestModel f1, fN;
    const double t_rf_1 = timed([&] { f1 = train_random_forest(X, y, fc, 7, 1); });
    const double t_rf_n = timed([&] { fN = train_random_forest(X, y, fc, 7, threads); });
    const bool same = model_to_json(TrainedModel{f1}) == model_to_json(TrainedModel{fN});
    std::printf("forest       1-thr  %8.3fs   omp %8.3fs   speedup %.2fx   identical %s\n",
                t_rf_1, t_rf_n, t_rf_1 / t_rf_n, same ? "yes" : "NO");
    return same ? 0 : 1;
}
