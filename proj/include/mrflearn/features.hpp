// Monte Carlo estimates phi_{t,m}(x) of (P^t g_m)(x) from forward simulation.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mrflearn/basis.hpp"
#include "mrflearn/gibbs.hpp"
#include "mrflearn/matrix.hpp"

namespace mrflearn {

inline constexpr std::size_t kDefaultFeatureCap = 20000;

enum class SeedScheme {
  // One independent simulation stream per (example, t, m, j).
  kPerEntry,
  // The T simulations from a state at time t are shared by every g_m, and
  // are keyed by the state itself, so repeated examples reuse them.
  kSharedEndpoints,
};

std::string to_string(SeedScheme scheme);
SeedScheme parse_seed_scheme(const std::string& name);

struct FeatureConfig {
  std::size_t tau_max = 0;
  std::size_t samples = 1;  // T
  // Explicit time grid; empty means every t in 0..tau_max.
  std::vector<std::size_t> time_grid;
  SeedScheme scheme = SeedScheme::kPerEntry;

  std::vector<std::size_t> times() const;
  void validate() const;
};

// {0, 1, 2, 4, ..., tau_max}
std::vector<std::size_t> geometric_time_grid(std::size_t tau_max);

// Mean of g over T independent t-step simulations from x.
double estimate_phi(const ChainOracle& oracle, const BasisFunction& g, const Configuration& x,
                    std::size_t t, std::size_t samples, RngStream& rng);

struct FeatureSet {
  DenseMatrix phi;  // examples x features, columns ordered by (t, m)
  std::vector<std::pair<std::size_t, std::size_t>> descriptors;  // (t, m)
  FeatureConfig config;
  std::uint64_t master_seed = 0;

  std::size_t rows() const { return phi.rows(); }
  std::size_t cols() const { return phi.cols(); }
};

struct FeatureBuildOptions {
  std::size_t workers = 1;
  std::size_t feature_cap = kDefaultFeatureCap;
};

FeatureSet build_feature_set(const ChainOracle& oracle, const BasisFamily& family,
                             const std::vector<Configuration>& xs, const FeatureConfig& config,
                             std::uint64_t master_seed, const FeatureBuildOptions& options = {});

// ceil(ln(universe / delta) / epsilon2^2), at least 1. `universe` stands for
// tau_max |X| |G| or a surrogate when |X| is too large to state.
std::size_t hoeffding_T(double epsilon2, double delta, double universe);

}  // namespace mrflearn
