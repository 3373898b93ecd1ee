#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mrflearn {

struct Edge {
  int u = 0;
  int v = 0;
};

// Simple undirected graph. Edges are stored with u < v in insertion order;
// adjacency is kept in CSR form together with the edge id of every entry so
// per-edge parameters can be looked up from a neighbor walk.
class Graph {
 public:
  Graph() = default;
  // Throws InputError on self-loops, duplicate edges or out-of-range endpoints.
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const int> neighbors(std::size_t i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  // Edge ids aligned with neighbors(i).
  std::span<const int> incident_edges(std::size_t i) const {
    return {adj_edge_.data() + offsets_[i], adj_edge_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t max_degree() const;
  bool has_edge(int u, int v) const;

  // All-pairs hop distances by BFS; -1 for unreachable pairs.
  std::vector<std::vector<int>> distances() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> adj_;
  std::vector<int> adj_edge_;
};

enum class GraphKind { kCycle, kPath, kComplete, kGrid, kErdosRenyi };

struct GraphParams {
  std::size_t n = 0;      // cycle, path, complete, erdos_renyi
  std::size_t rows = 0;   // grid
  std::size_t cols = 0;   // grid
  double p = 0.0;         // erdos_renyi
};

Graph make_cycle(std::size_t n);
Graph make_path(std::size_t n);
Graph make_complete(std::size_t n);
Graph make_grid(std::size_t rows, std::size_t cols);
// Each of the n(n-1)/2 pairs is included independently with probability p;
// deterministic in seed.
Graph make_erdos_renyi(std::size_t n, double p, std::uint64_t seed);
Graph make_graph(GraphKind kind, const GraphParams& params, std::uint64_t seed = 0);

GraphKind parse_graph_kind(const std::string& name);
std::string to_string(GraphKind kind);

}  // namespace mrflearn
