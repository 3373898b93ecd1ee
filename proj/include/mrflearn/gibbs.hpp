// Lazy single-site Gibbs (Glauber) dynamics for the Ising and coloring models.
//
// One step: pick a site uniformly, with probability 1/2 do nothing, otherwise
// resample the site from its conditional distribution given the neighbors
// (heat-bath for Ising, uniform over free colors for colorings). The exact
// transition probabilities of the same step are exposed through
// transition_row() so samplers and exact matrices cannot drift apart.
#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mrflearn/models.hpp"
#include "mrflearn/rng.hpp"

namespace mrflearn {

// The one-step oracle OS(x): a random successor of x under the chain.
class ChainOracle {
 public:
  explicit ChainOracle(MrfModel model);

  const MrfModel& model() const { return *model_; }
  std::size_t num_sites() const { return n_; }
  std::size_t alphabet_size() const { return alphabet_; }

  // Applies one step to x in place. Returns the site whose value changed, or
  // -1 when the step was a self-loop. Assumes x is in the support.
  int advance(Configuration& x, RngStream& rng) const {
    if (!nth_color_.empty()) {
      // Same draws as coloring_step.
      const std::uint64_t r = rng.below(2 * n_);
      if (r & 1) return -1;
      const std::size_t i = r >> 1;
      std::uint64_t used = 0;
      for (int k = adj_offsets_[i]; k < adj_offsets_[i + 1]; ++k) used |= std::uint64_t{1} << x[adj_[k]];
      const std::uint64_t free = full_mask_ & ~used;
      const auto count = static_cast<std::uint64_t>(std::popcount(free));
      const int color = nth_color_[free * 8 + rng.below(count)];
      if (color == x[i]) return -1;
      x[i] = static_cast<std::int8_t>(color);
      return static_cast<int>(i);
    }
    if (!flip_table_.empty()) {
      const std::uint64_t r = rng.below(2 * n_);
      if (r & 1) return -1;
      const std::size_t i = r >> 1;
      int sum = 0;
      for (int k = adj_offsets_[i]; k < adj_offsets_[i + 1]; ++k) sum += x[adj_[k]];
      const double p = flip_table_[(x[i] > 0 ? table_width_ : 0) + sum + max_degree_];
      if (rng.uniform() < p) {
        x[i] = static_cast<std::int8_t>(-x[i]);
        return static_cast<int>(i);
      }
      return -1;
    }
    return advance_general(x, rng);
  }

  // The non-lazy half of a step: resample one uniformly chosen site from its
  // conditional law. advance() is a fair coin between this and a hold.
  int resample(Configuration& x, RngStream& rng) const {
    if (!nth_color_.empty()) {
      const std::size_t i = rng.below(n_);
      std::uint64_t used = 0;
      for (int k = adj_offsets_[i]; k < adj_offsets_[i + 1]; ++k) used |= std::uint64_t{1} << x[adj_[k]];
      const std::uint64_t free = full_mask_ & ~used;
      const auto count = static_cast<std::uint64_t>(std::popcount(free));
      const int color = nth_color_[free * 8 + rng.below(count)];
      if (color == x[i]) return -1;
      x[i] = static_cast<std::int8_t>(color);
      return static_cast<int>(i);
    }
    if (!flip_table_.empty()) {
      const std::size_t i = rng.below(n_);
      int sum = 0;
      for (int k = adj_offsets_[i]; k < adj_offsets_[i + 1]; ++k) sum += x[adj_[k]];
      const double p = flip_table_[(x[i] > 0 ? table_width_ : 0) + sum + max_degree_];
      if (rng.uniform() < p) {
        x[i] = static_cast<std::int8_t>(-x[i]);
        return static_cast<int>(i);
      }
      return -1;
    }
    return resample_general(x, rng);
  }
  Configuration step(const Configuration& x, RngStream& rng) const;
  // t steps. The number of non-lazy steps among them is Binomial(t, 1/2),
  // drawn as the popcount of t random bits, and only those are simulated.
  void run(Configuration& x, std::size_t t, RngStream& rng) const {
    for (; t > 0; t -= std::min<std::size_t>(t, 64)) {
      const std::uint64_t bits = rng();
      const std::uint64_t live = t >= 64 ? bits : bits & ((std::uint64_t{1} << t) - 1);
      for (int k = std::popcount(live); k > 0; --k) resample(x, rng);
    }
  }

 private:
  int advance_general(Configuration& x, RngStream& rng) const;
  int resample_general(Configuration& x, RngStream& rng) const;

  std::shared_ptr<const MrfModel> model_;
  std::size_t n_ = 0;
  std::size_t alphabet_ = 2;
  // Uniform-coupling Ising: flip probabilities by (spin, neighbor spin sum).
  std::vector<double> flip_table_;
  int table_width_ = 0;
  int max_degree_ = 0;
  // Flattened adjacency for the fast paths; for colorings with q <= 8 also an
  // nth-free-color lookup.
  std::vector<int> adj_offsets_;
  std::vector<int> adj_;
  std::uint64_t full_mask_ = 0;
  std::vector<std::int8_t> nth_color_;  // [free mask * 8 + k]
};

ChainOracle one_step_oracle(const MrfModel& model);

// Number of holds before the next non-lazy step, Geometric(1/2) on {0, 1, ...}.
// Running lazy_holds() holds and then ChainOracle::resample() reproduces the
// law of the lazy walk while skipping the self-loop draws.
inline std::uint64_t lazy_holds(RngStream& rng) {
  std::uint64_t holds = 0;
  for (std::uint64_t w = rng(); ; w = rng()) {
    if (w != 0) return holds + static_cast<std::uint64_t>(std::countr_zero(w));
    holds += 64;
  }
}

// Single heat-bath step; x must have the model's shape.
Configuration glauber_step(const IsingModel& model, const Configuration& x, RngStream& rng);
// Single coloring step; throws InputError if c is not a proper coloring.
Configuration coloring_step(const ColoringModel& model, const Configuration& c, RngStream& rng);

Configuration simulate_t_steps(const ChainOracle& oracle, Configuration x, std::size_t t,
                               RngStream& rng);

// ceil(10 n ln(max(n, 2)))
std::size_t default_burn_in(std::size_t n);

// `count` endpoints of independent burn_in-step walks, each from a fresh start:
// uniform spins for Ising; for colorings the greedy coloring under a uniformly
// random relabeling of the colors.
std::vector<Configuration> sample_stationary_iid(const ChainOracle& oracle, std::size_t burn_in,
                                                 std::size_t count, RngStream& rng);

// Smallest-free-color greedy coloring in node order. Throws InputError when
// some node has no free color.
Configuration greedy_initial_coloring(const ColoringModel& model);

using LabelFunction = std::function<int(const Configuration&)>;

struct LabeledWalk {
  std::vector<Configuration> states;
  std::vector<std::int8_t> labels;
};

LabeledWalk labeled_walk(const ChainOracle& oracle, const LabelFunction& label,
                         const Configuration& start, std::size_t length, RngStream& rng);

// Throws InputError naming the first step where consecutive states differ in
// more than one coordinate or the lengths disagree.
void validate_walk(const LabeledWalk& walk);

struct SiteMove {
  std::uint32_t site = 0;
  std::int8_t value = 0;
  double probability = 0.0;
};

// Exact row P(x, .) of the chain: self-loop mass and every single-site move
// with positive probability. x must be in the support.
struct TransitionRow {
  double stay = 0.0;
  std::vector<SiteMove> moves;
};
TransitionRow transition_row(const MrfModel& model, const Configuration& x);

}  // namespace mrflearn
