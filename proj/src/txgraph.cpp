#include "chainsift/txgraph.hpp"

#include <omp.h>

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "chainsift/io_util.hpp"

namespace chainsift {

namespace {

int resolve_threads(int threads) {
    return threads > 0 ? threads : omp_get_max_threads();
}

// BFS scratch reused across sources by one thread.
struct BfsScratch {
    std::vector<int> dist;
    std::vector<std::size_t> order;  // visit order, doubles as the queue

    explicit BfsScratch(std::size_t n) : dist(n, -1) { order.reserve(n); }

    void run(const std::vector<std::vector<std::size_t>>& adj, std::size_t source) {
        std::fill(dist.begin(), dist.end(), -1);
        order.clear();
        dist[source] = 0;
        order.push_back(source);
        for (std::size_t head = 0; head < order.size(); ++head) {
            const std::size_t v = order[head];
            for (std::size_t w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    order.push_back(w);
                }
            }
        }
    }
};

double closeness_of(const BfsScratch& bfs, std::size_t n) {
    const std::size_t reached = bfs.order.size() - 1;  // excluding the source
    if (reached == 0) return 0.0;
    long long dist_sum = 0;
    for (std::size_t v : bfs.order) dist_sum += bfs.dist[v];
    const double r = static_cast<double>(reached);
    return (r / static_cast<double>(n - 1)) * (r / static_cast<double>(dist_sum));
}

// One Brandes source: BFS with path counts, then reverse-order dependency
// accumulation into `acc`. The source itself receives no credit.
struct BrandesScratch {
    std::vector<int> dist;
    std::vector<double> sigma;
    std::vector<double> delta;
    std::vector<std::size_t> order;

    explicit BrandesScratch(std::size_t n) : dist(n, -1), sigma(n, 0.0), delta(n, 0.0) {
        order.reserve(n);
    }

    void run(const std::vector<std::vector<std::size_t>>& adj, std::size_t source,
             std::vector<double>& acc) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        order.clear();

        dist[source] = 0;
        sigma[source] = 1.0;
        order.push_back(source);
        for (std::size_t head = 0; head < order.size(); ++head) {
            const std::size_t v = order[head];
            for (std::size_t w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    order.push_back(w);
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (std::size_t i = order.size(); i-- > 1;) {
            const std::size_t w = order[i];
            for (std::size_t v : adj[w]) {
                if (dist[v] == dist[w] - 1)
                    delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w]);
            }
            acc[w] += delta[w];
        }
    }
};

NodeScores to_scores(const TransactionGraph& g, Centrality kind,
                     const std::vector<double>& values) {
    NodeScores out;
    out.kind = kind;
    for (std::size_t v = 0; v < g.node_count(); ++v) out.score[g.addresses()[v]] = values[v];
    return out;
}

void require_two_nodes(const TransactionGraph& g, const char* op) {
    if (g.node_count() < 2)
        throw std::invalid_argument(std::string(op) + ": degenerate normalization (need >= 2 nodes)");
}

}  // namespace

std::optional<std::size_t> TransactionGraph::node_id(const std::string& address) const {
    auto it = index_.find(address);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

TransactionGraph build_graph(const std::vector<TransferRecord>& transfers) {
    TransactionGraph g;
    auto intern = [&g](const std::string& addr) {
        auto [it, inserted] = g.index_.try_emplace(addr, g.addresses_.size());
        if (inserted) g.addresses_.push_back(addr);
        return it->second;
    };
    g.edges_.reserve(transfers.size());
    for (const auto& t : transfers) {
        const std::size_t s = intern(t.src);
        const std::size_t d = intern(t.dst);
        g.edges_.push_back({s, d, t.value, t.timestamp});
    }
    g.neighbors_.assign(g.addresses_.size(), {});
    for (const auto& e : g.edges_) {
        if (e.src == e.dst) continue;
        g.neighbors_[e.src].push_back(e.dst);
        g.neighbors_[e.dst].push_back(e.src);
    }
    for (auto& nbrs : g.neighbors_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return g;
}

NodeScores degree_centrality(const TransactionGraph& g) {
    require_two_nodes(g, "degree_centrality");
    const double denom = static_cast<double>(g.node_count() - 1);
    std::vector<double> values(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v)
        values[v] = static_cast<double>(g.neighbors()[v].size()) / denom;
    return to_scores(g, Centrality::Degree, values);
}

NodeScores closeness_centrality_serial(const TransactionGraph& g) {
    require_two_nodes(g, "closeness_centrality");
    const std::size_t n = g.node_count();
    std::vector<double> values(n, 0.0);
    BfsScratch bfs(n);
    for (std::size_t v = 0; v < n; ++v) {
        bfs.run(g.neighbors(), v);
        values[v] = closeness_of(bfs, n);
    }
    return to_scores(g, Centrality::Closeness, values);
}

NodeScores closeness_centrality(const TransactionGraph& g, int threads) {
    require_two_nodes(g, "closeness_centrality");
    const std::size_t n = g.node_count();
    std::vector<double> values(n, 0.0);

#pragma omp parallel num_threads(resolve_threads(threads))
    {
        BfsScratch bfs(n);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(n); ++v) {
            bfs.run(g.neighbors(), static_cast<std::size_t>(v));
            values[static_cast<std::size_t>(v)] = closeness_of(bfs, n);
        }
    }
    return to_scores(g, Centrality::Closeness, values);
}

NodeScores betweenness_centrality_serial(const TransactionGraph& g) {
    require_two_nodes(g, "betweenness_centrality");
    const std::size_t n = g.node_count();
    std::vector<double> acc(n, 0.0);
    BrandesScratch scratch(n);
    for (std::size_t s = 0; s < n; ++s) scratch.run(g.neighbors(), s, acc);
    for (double& v : acc) v *= 0.5;  // undirected: each pair seen from both ends
    return to_scores(g, Centrality::Betweenness, acc);
}

NodeScores betweenness_centrality(const TransactionGraph& g, int threads) {
    require_two_nodes(g, "betweenness_centrality");
    const std::size_t n = g.node_count();

    // Sources are grouped into fixed blocks; each block's partial sums are
    // computed by exactly one thread and the partials are reduced in block
    // order, so the result does not depend on the thread count.
    constexpr std::size_t kBlock = 64;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> partials(n_blocks);

#pragma omp parallel num_threads(resolve_threads(threads))
    {
        BrandesScratch scratch(n);
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
            auto& acc = partials[static_cast<std::size_t>(b)];
            acc.assign(n, 0.0);
            const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
            const std::size_t hi = std::min(n, lo + kBlock);
            for (std::size_t s = lo; s < hi; ++s) scratch.run(g.neighbors(), s, acc);
        }
    }

    std::vector<double> acc(n, 0.0);
    for (const auto& part : partials)
        for (std::size_t v = 0; v < n; ++v) acc[v] += part[v];
    for (double& v : acc) v *= 0.5;
    return to_scores(g, Centrality::Betweenness, acc);
}

std::string scores_csv(const NodeScores& scores) {
    std::ostringstream ss;
    ss << "address,score\n";
    for (const auto& [addr, score] : scores.score) ss << addr << ',' << fmt_double(score) << '\n';
    return ss.str();
}

}  // namespace chainsift
