/// @file txgraph.hpp
/// @brief Wallet transaction graph and degree/closeness/betweenness centrality.
///
/// The graph keeps the directed multi-edge list as built, but all three
/// centralities run on the undirected projection with parallel edges and
/// self-loops collapsed, using unweighted shortest paths.
///
/// Closeness and betweenness ship in two forms: an OpenMP kernel (the
/// default) and a plain serial reference used by the tests and the benchmark.
/// The parallel kernels are bit-identical to the serial ones for any thread
/// count: closeness writes one independent slot per node, and betweenness
/// accumulates per-source sums into fixed source blocks that are reduced in
/// block order.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainsift/ingest.hpp"

namespace chainsift {

class TransactionGraph {
public:
    struct Edge {
        std::size_t src = 0;
        std::size_t dst = 0;
        std::int64_t value = 0;
        std::int64_t timestamp = 0;
    };

    std::size_t node_count() const { return addresses_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    /// Node id -> address, in first-appearance order over the transfer list.
    const std::vector<std::string>& addresses() const { return addresses_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Collapsed undirected adjacency: distinct neighbors, sorted by id,
    /// self excluded.
    const std::vector<std::vector<std::size_t>>& neighbors() const { return neighbors_; }

    std::optional<std::size_t> node_id(const std::string& address) const;

private:
    friend TransactionGraph build_graph(const std::vector<TransferRecord>& transfers);

    std::vector<std::string> addresses_;
    std::map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

TransactionGraph build_graph(const std::vector<TransferRecord>& transfers);

enum class Centrality { Degree, Closeness, Betweenness };

struct NodeScores {
    Centrality kind = Centrality::Degree;
    std::map<std::string, double> score;  // one entry per graph node
};

/// Distinct-neighbor count / (n - 1). Throws on a graph with < 2 nodes.
NodeScores degree_centrality(const TransactionGraph& g);

/// Component-scaled closeness: for reachable set R(v) (excluding v),
/// score = (|R|/(n-1)) * (|R| / sum of distances). Isolated nodes score 0.
NodeScores closeness_centrality(const TransactionGraph& g, int threads = 0);
NodeScores closeness_centrality_serial(const TransactionGraph& g);

/// Shortest-path betweenness via Brandes' dependency accumulation,
/// each unordered pair counted once, fractional credit over ties.
NodeScores betweenness_centrality(const TransactionGraph& g, int threads = 0);
NodeScores betweenness_centrality_serial(const TransactionGraph& g);

/// `address,score` rows ordered by address.
std::string scores_csv(const NodeScores& scores);

}  // namespace chainsift
