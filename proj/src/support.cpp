#include "mrflearn/support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrflearn/errors.hpp"
#include "mrflearn/gibbs.hpp"

namespace mrflearn {
namespace {

void decode_into(std::uint64_t code, std::uint64_t a, bool spins, std::int8_t* out,
                 std::size_t n) {
  for (std::size_t k = n; k-- > 0;) {
    const auto digit = static_cast<std::int8_t>(code % a);
    code /= a;
    out[k] = spins ? static_cast<std::int8_t>(digit == 1 ? 1 : -1) : digit;
  }
}

std::uint64_t digit_of(std::int8_t v, bool spins) {
  return spins ? (v > 0 ? 1 : 0) : static_cast<std::uint64_t>(v);
}

}  // namespace

SupportIndex::SupportIndex(const MrfModel& model, std::uint64_t cap)
    : model_(std::make_shared<const MrfModel>(model)), n_(mrflearn::num_sites(model)) {
  const std::uint64_t space = code_space_size(model);
  if (space == 0 || space > cap) {
    throw SizeCapError("state space |A|^n = " + std::to_string(alphabet_size(model)) + "^" +
                       std::to_string(n_) + " exceeds the enumeration cap of " +
                       std::to_string(cap) + " states");
  }
  const std::uint64_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  const auto* coloring = std::get_if<ColoringModel>(&model);
  lookup_.assign(space, kAbsent);
  auto x = Configuration(std::vector<std::int8_t>(n_));
  for (std::uint64_t code = 0; code < space; ++code) {
    decode_into(code, a, spins, x.values.data(), n_);
    if (coloring != nullptr && !is_valid_coloring(*coloring, x)) continue;
    lookup_[code] = static_cast<std::uint32_t>(codes_.size());
    codes_.push_back(code);
    flat_.insert(flat_.end(), x.values.begin(), x.values.end());
  }
}

Configuration SupportIndex::state(std::size_t k) const {
  auto v = values(k);
  return Configuration(std::vector<std::int8_t>(v.begin(), v.end()));
}

std::size_t SupportIndex::index_of(const Configuration& x) const {
  if (x.size() != n_) return npos;
  const std::uint64_t a = alphabet_size(*model_);
  const bool spins = is_ising(*model_);
  std::uint64_t code = 0;
  for (auto v : x.values) {
    if (spins ? (v != 1 && v != -1) : (v < 0 || static_cast<std::uint64_t>(v) >= a)) return npos;
    code = code * a + digit_of(v, spins);
  }
  return index_of_code(code);
}

std::shared_ptr<const SupportIndex> enumerate_support(const MrfModel& model, std::uint64_t cap) {
  return std::make_shared<const SupportIndex>(model, cap);
}

namespace {

// Calls emit(row, col, probability) for every nonzero entry of P, row-major.
template <typename Emit>
void for_each_transition(const SupportIndex& support, Emit&& emit) {
  const MrfModel& model = support.model();
  const std::size_t n = support.num_sites();
  const std::uint64_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  std::vector<std::uint64_t> place(n);
  std::uint64_t w = 1;
  for (std::size_t i = n; i-- > 0;) {
    place[i] = w;
    w *= a;
  }
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Configuration x = support.state(k);
    const TransitionRow row = transition_row(model, x);
    emit(k, k, row.stay);
    const std::uint64_t code = support.code(k);
    for (const SiteMove& mv : row.moves) {
      const std::uint64_t next =
          code - digit_of(x[mv.site], spins) * place[mv.site] + digit_of(mv.value, spins) * place[mv.site];
      const std::size_t j = support.index_of_code(next);
      if (j == SupportIndex::npos) throw NumericalError("transition leaves the support");
      emit(k, j, mv.probability);
    }
  }
}

}  // namespace

TransitionMatrix exact_transition_matrix(std::shared_ptr<const SupportIndex> support,
                                         std::size_t dense_cap) {
  const std::size_t s = support->size();
  if (s > dense_cap) {
    throw SizeCapError("support of " + std::to_string(s) +
                       " states exceeds the dense matrix cap of " + std::to_string(dense_cap));
  }
  TransitionMatrix tm{support, DenseMatrix(s, s)};
  for_each_transition(*support, [&](std::size_t r, std::size_t c, double p) { tm.p(r, c) += p; });
  return tm;
}

TransitionMatrix exact_transition_matrix(const MrfModel& model, std::size_t dense_cap) {
  return exact_transition_matrix(enumerate_support(model), dense_cap);
}

TransitionMatrix hypercube_walk_matrix(std::size_t n, std::size_t dense_cap) {
  if (n == 0) throw InputError("hypercube_walk_matrix: n must be positive");
  TransitionMatrix t;
  t.support = enumerate_support(IsingModel::uniform(Graph(n, {}), 0.0));
  const std::size_t s = t.support->size();
  if (s > dense_cap) throw SizeCapError("hypercube_walk_matrix: 2^n exceeds the dense cap");
  t.p = DenseMatrix(s, s);
  const double move = 0.5 / static_cast<double>(n);
  for (std::size_t k = 0; k < s; ++k) {
    t.p(k, k) = 0.5;
    // codes put x_0 in the top bit; the support is the full cube in code order
    for (std::size_t i = 0; i < n; ++i) t.p(k, k ^ (std::size_t{1} << i)) = move;
  }
  return t;
}

void SparseChain::apply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r + 1 < offsets.size(); ++r) {
    double acc = 0.0;
    for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) acc += vals[e] * x[cols[e]];
    y[r] = acc;
  }
}

SparseChain sparse_transition_matrix(std::shared_ptr<const SupportIndex> support) {
  SparseChain chain;
  chain.support = support;
  chain.offsets.assign(support->size() + 1, 0);
  for_each_transition(*support, [&](std::size_t r, std::size_t c, double p) {
    chain.cols.push_back(static_cast<std::uint32_t>(c));
    chain.vals.push_back(p);
    chain.offsets[r + 1] = chain.cols.size();
  });
  return chain;
}

std::vector<double> stationary_exact(const SupportIndex& support) {
  std::vector<double> logw(support.size());
  double top = -INFINITY;
  for (std::size_t k = 0; k < support.size(); ++k) {
    logw[k] = log_stationary_weight(support.model(), support.state(k));
    top = std::max(top, logw[k]);
  }
  double total = 0.0;
  for (double& v : logw) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logw) v /= total;
  return logw;
}

std::vector<std::vector<int>> graph_automorphisms(const Graph& graph, std::size_t limit) {
  const int n = static_cast<int>(graph.num_nodes());
  std::vector<std::vector<int>> out;
  std::vector<int> map(n, -1);
  std::vector<char> used(n, 0);
  auto extend = [&](auto&& self, int v) -> void {
    if (out.size() >= limit) return;
    if (v == n) {
      out.push_back(map);
      return;
    }
    for (int w = 0; w < n; ++w) {
      if (used[w] || graph.degree(w) != graph.degree(v)) continue;
      bool ok = true;
      for (int u = 0; u < v && ok; ++u) ok = graph.has_edge(u, v) == graph.has_edge(map[u], w);
      if (!ok) continue;
      map[v] = w;
      used[w] = 1;
      self(self, v + 1);
      used[w] = 0;
      map[v] = -1;
      if (out.size() >= limit) return;
    }
  };
  // Identity first: the search tries w = v before larger images.
  extend(extend, 0);
  return out;
}

namespace {

bool preserves_couplings(const IsingModel& model, const std::vector<int>& g) {
  if (model.uniform_coupling()) return true;
  const Graph& graph = model.graph();
  const auto beta = model.beta();
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge ed = graph.edges()[e];
    const int a = g[ed.u];
    const int b = g[ed.v];
    const auto nbrs = graph.neighbors(a);
    const auto ids = graph.incident_edges(a);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (nbrs[k] == b && beta[ids[k]] != beta[e]) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::size_t> symmetry_representatives(const SupportIndex& support) {
  const MrfModel& model = support.model();
  const std::size_t n = support.num_sites();
  const auto* ising = std::get_if<IsingModel>(&model);
  bool flip = false;
  if (ising != nullptr && ising->field() == 0.0) {
    flip = true;
    const auto beta = ising->beta();
    if (std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0.0; })) {
      // Product chain with symmetric marginals: every start is equivalent.
      return {0};
    }
  }
  std::vector<std::vector<int>> autos = graph_automorphisms(graph_of(model));
  if (ising != nullptr) {
    std::erase_if(autos, [&](const auto& g) { return !preserves_couplings(*ising, g); });
  }
  const std::uint64_t a = alphabet_size(model);
  std::vector<std::int8_t> y(n);
  std::vector<std::uint64_t> canon;
  canon.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto x = support.values(k);
    std::uint64_t best = UINT64_MAX;
    for (const auto& g : autos) {
      for (std::size_t i = 0; i < n; ++i) y[g[i]] = x[i];
      std::uint64_t code = 0;
      if (ising != nullptr) {
        std::uint64_t flipped = 0;
        for (std::size_t i = 0; i < n; ++i) {
          code = code * 2 + (y[i] > 0 ? 1 : 0);
          flipped = flipped * 2 + (y[i] > 0 ? 0 : 1);
        }
        if (flip) code = std::min(code, flipped);
      } else {
        std::int8_t relabel[64];
        std::fill(std::begin(relabel), std::end(relabel), static_cast<std::int8_t>(-1));
        std::int8_t next = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (relabel[y[i]] < 0) relabel[y[i]] = next++;
          code = code * a + static_cast<std::uint64_t>(relabel[y[i]]);
        }
      }
      best = std::min(best, code);
    }
    canon.push_back(best);
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  std::vector<std::size_t> reps;
  reps.reserve(canon.size());
  for (std::uint64_t c : canon) {
    const std::size_t k = support.index_of_code(c);
    if (k == SupportIndex::npos) throw NumericalError("symmetry image left the support");
    reps.push_back(k);
  }
  return reps;
}

std::size_t mixing_time(const SparseChain& chain, std::span<const double> pi, double threshold,
                        std::size_t max_steps) {
  const std::size_t s = chain.size();
  if (pi.size() != s) throw InputError("mixing_time: distribution length mismatch");
  std::vector<double> h(s);
  std::vector<double> next(s);
  auto distance = [&] {
    double d = 0.0;
    for (std::size_t y = 0; y < s; ++y) d += pi[y] * std::fabs(h[y] - 1.0);
    return 0.5 * d;
  };
  std::size_t worst = 0;
  for (std::size_t x : symmetry_representatives(*chain.support)) {
    std::fill(h.begin(), h.end(), 0.0);
    h[x] = 1.0 / pi[x];
    std::size_t t = 0;
    while (distance() > threshold) {
      if (++t > max_steps) {
        throw NumericalError("mixing_time: distance above threshold after " +
                             std::to_string(max_steps) + " steps");
      }
      chain.apply(h, next);
      h.swap(next);
    }
    worst = std::max(worst, t);
  }
  return worst;
}

}  // namespace mrflearn
