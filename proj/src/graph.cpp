#include "mrflearn/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <utility>

#include "mrflearn/errors.hpp"
#include "mrflearn/rng.hpp"

namespace mrflearn {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  std::set<std::pair<int, int>> seen;
  for (Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n ||
        static_cast<std::size_t>(e.v) >= n) {
      throw InputError("edge endpoint out of range: " + std::to_string(e.u) + " " +
                       std::to_string(e.v));
    }
    if (e.u == e.v) throw InputError("self-loop at node " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.emplace(e.u, e.v).second) {
      throw InputError("duplicate edge " + std::to_string(e.u) + " " + std::to_string(e.v));
    }
  }
  edges_ = std::move(edges);

  std::vector<std::size_t> deg(n, 0);
  for (const Edge& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.resize(offsets_[n]);
  adj_edge_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t id = 0; id < edges_.size(); ++id) {
    const Edge& e = edges_[id];
    adj_[fill[e.u]] = e.v;
    adj_edge_[fill[e.u]++] = static_cast<int>(id);
    adj_[fill[e.v]] = e.u;
    adj_edge_[fill[e.v]++] = static_cast<int>(id);
  }
}

std::size_t Graph::max_degree() const {
  std::size_t d = 0;
  for (std::size_t i = 0; i < n_; ++i) d = std::max(d, degree(i));
  return d;
}

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || static_cast<std::size_t>(u) >= n_) return false;
  const auto nb = neighbors(static_cast<std::size_t>(u));
  return std::find(nb.begin(), nb.end(), v) != nb.end();
}

std::vector<std::vector<int>> Graph::distances() const {
  std::vector<std::vector<int>> dist(n_, std::vector<int>(n_, -1));
  for (std::size_t s = 0; s < n_; ++s) {
    std::deque<int> queue{static_cast<int>(s)};
    dist[s][s] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : neighbors(static_cast<std::size_t>(u))) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw InputError("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({static_cast<int>(i), static_cast<int>((i + 1) % n)});
  }
  return Graph(n, std::move(edges));
}

Graph make_path(std::size_t n) {
  if (n < 1) throw InputError("path needs n >= 1");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    edges.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
  }
  return Graph(n, std::move(edges));
}

Graph make_complete(std::size_t n) {
  if (n < 1) throw InputError("complete graph needs n >= 1");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      edges.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_grid(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw InputError("grid needs rows, cols >= 1");
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const int v = static_cast<int>(r * cols + c);
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + static_cast<int>(cols)});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

Graph make_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw InputError("erdos_renyi needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("erdos_renyi needs p in [0, 1]");
  RngStream rng(seed, {0x6572ULL, n});
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_graph(GraphKind kind, const GraphParams& params, std::uint64_t seed) {
  switch (kind) {
    case GraphKind::kCycle: return make_cycle(params.n);
    case GraphKind::kPath: return make_path(params.n);
    case GraphKind::kComplete: return make_complete(params.n);
    case GraphKind::kGrid: return make_grid(params.rows, params.cols);
    case GraphKind::kErdosRenyi: return make_erdos_renyi(params.n, params.p, seed);
  }
  throw InputError("unknown graph kind");
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "cycle") return GraphKind::kCycle;
  if (name == "path") return GraphKind::kPath;
  if (name == "complete") return GraphKind::kComplete;
  if (name == "grid") return GraphKind::kGrid;
  if (name == "erdos_renyi" || name == "er") return GraphKind::kErdosRenyi;
  throw InputError("unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kCycle: return "cycle";
    case GraphKind::kPath: return "path";
    case GraphKind::kComplete: return "complete";
    case GraphKind::kGrid: return "grid";
    case GraphKind::kErdosRenyi: return "erdos_renyi";
  }
  return "?";
}

}  // namespace mrflearn
