// Exact, enumerated view of a model: its support, transition matrix,
// stationary distribution and worst-start mixing time.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mrflearn/matrix.hpp"
#include "mrflearn/models.hpp"

namespace mrflearn {

// Cap on |A|^n for enumeration.
inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t{1} << 21;
// Cap on support size for dense |X| x |X| matrices.
inline constexpr std::size_t kDenseStateCap = 8192;

class SupportIndex {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Enumerates the support in lexicographic order. Throws SizeCapError when
  // |A|^n exceeds `cap`.
  explicit SupportIndex(const MrfModel& model, std::uint64_t cap = kDefaultStateCap);

  const MrfModel& model() const { return *model_; }
  std::size_t size() const { return codes_.size(); }
  std::size_t num_sites() const { return n_; }

  std::uint64_t code(std::size_t k) const { return codes_[k]; }
  std::span<const std::uint64_t> codes() const { return codes_; }
  std::span<const std::int8_t> values(std::size_t k) const { return {flat_.data() + k * n_, n_}; }
  Configuration state(std::size_t k) const;

  // Position of the configuration in the support, or npos.
  std::size_t index_of_code(std::uint64_t code) const {
    if (code >= lookup_.size()) return npos;
    const std::uint32_t k = lookup_[code];
    return k == kAbsent ? npos : k;
  }
  std::size_t index_of(const Configuration& x) const;

 private:
  static constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;
  std::shared_ptr<const MrfModel> model_;
  std::size_t n_ = 0;
  std::vector<std::uint64_t> codes_;
  std::vector<std::int8_t> flat_;
  std::vector<std::uint32_t> lookup_;
};

std::shared_ptr<const SupportIndex> enumerate_support(const MrfModel& model,
                                                      std::uint64_t cap = kDefaultStateCap);

struct TransitionMatrix {
  std::shared_ptr<const SupportIndex> support;
  DenseMatrix p;
  std::size_t size() const { return p.rows(); }
};

// Throws SizeCapError when the support exceeds `dense_cap`.
TransitionMatrix exact_transition_matrix(std::shared_ptr<const SupportIndex> support,
                                         std::size_t dense_cap = kDenseStateCap);
TransitionMatrix exact_transition_matrix(const MrfModel& model,
                                         std::size_t dense_cap = kDenseStateCap);

// Simple random walk on {-1,1}^n: stay with probability 1/2, otherwise flip
// one uniformly chosen coordinate. Its stationary law is uniform and the
// parity chi_S is an eigenvector with eigenvalue 1 - |S|/n. The free (beta = 0)
// Glauber chain equals (I + walk) / 2.
TransitionMatrix hypercube_walk_matrix(std::size_t n, std::size_t dense_cap = kDenseStateCap);

// Same chain in CSR form, usable well beyond the dense cap.
struct SparseChain {
  std::shared_ptr<const SupportIndex> support;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;

  std::size_t size() const { return offsets.size() - 1; }
  // y = P x
  void apply(std::span<const double> x, std::span<double> y) const;
};
SparseChain sparse_transition_matrix(std::shared_ptr<const SupportIndex> support);

// Normalized exp(log_stationary_weight) over the support.
std::vector<double> stationary_exact(const SupportIndex& support);

// Smallest t with max_x TV(P^t(x, .), pi) <= threshold. Start states are
// reduced by the model's symmetries (graph automorphisms preserving the
// couplings, global spin flip when B = 0, color relabeling), which leave the
// per-start distance unchanged. Throws NumericalError past max_steps.
std::size_t mixing_time(const SparseChain& chain, std::span<const double> pi,
                        double threshold = 0.25, std::size_t max_steps = 1000000);

// One representative per symmetry class of support states (support indices).
std::vector<std::size_t> symmetry_representatives(const SupportIndex& support);

// Graph automorphisms as node permutations, identity first; enumeration
// stops after `limit` maps (any subset is still sound for reduction).
std::vector<std::vector<int>> graph_automorphisms(const Graph& graph, std::size_t limit = 4096);

}  // namespace mrflearn
