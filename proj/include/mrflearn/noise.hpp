// Noise sensitivity NS_t(f) = Pr[f(x) != f(y)], x ~ pi, y ~ P^t(x, .), in
// exact spectral form and by simulation, together with the checks built on it.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrflearn/gibbs.hpp"
#include "mrflearn/models.hpp"
#include "mrflearn/support.hpp"

namespace mrflearn {

enum class NoiseMethod { kExact, kSampled };
std::string to_string(NoiseMethod method);

struct NoiseReport {
  double t = 0.0;
  double ns = 0.0;
  NoiseMethod method = NoiseMethod::kExact;
  std::size_t pairs = 0;
  double std_error = 0.0;
};

// 1/2 - 1/2 sum_l lambda_l^t fhat_l^2 for real t >= 0 (0^0 = 1).
NoiseReport noise_sensitivity_exact(std::span<const double> eigenvalues,
                                    std::span<const double> fhat, double t);

using StateSampler = std::function<Configuration(RngStream&)>;

// Exact draws from pi over an enumerated support (inverse CDF).
StateSampler exact_pi_sampler(std::shared_ptr<const SupportIndex> support, std::vector<double> pi);
// Endpoint of a burn-in walk from a fresh start.
StateSampler burn_in_sampler(const ChainOracle& oracle, std::size_t burn_in);

NoiseReport noise_sensitivity_sampled(const ChainOracle& oracle, const LabelFunction& f,
                                      std::size_t t, std::size_t pairs, std::uint64_t seed,
                                      const StateSampler& sampler, std::size_t workers = 1);

struct TailCheck {
  double rho = 0.0;
  double t = 0.0;             // -1 / ln(rho)
  std::size_t ell_star = 0;   // eigenvalues with lambda > rho (1-based index of the last one)
  double tail = 0.0;          // sum of fhat^2 over the rest
  double bound = 0.0;         // e / (e - 1) * NS_t
  double slack = 0.0;         // bound - tail
  // NS_t >= (1 - rho^t) tail / 2, so the provable constant is twice the one above.
  double corrected_bound = 0.0;  // 2e / (e - 1) * NS_t
  double corrected_slack = 0.0;
};
TailCheck tail_mass_check(std::span<const double> eigenvalues, std::span<const double> fhat, double rho);

struct StabilityPoint {
  double t = 0.0;
  double ns = 0.0;
  double stability = 0.0;  // 1 - 2 NS_t
};

struct StabilityCurve {
  std::vector<StabilityPoint> points;
  // Least-squares slope through the origin of ln(1 - 2 NS_t) against t / n,
  // negated, over points with positive stability.
  double fitted_exponent = 0.0;
  // min over t in the grid and a in 2..max_a of (1 - 2 NS_{at}) - (1 - 2 NS_t)^a.
  double worst_jensen_slack = 0.0;
};
StabilityCurve stability_curve(std::span<const double> eigenvalues, std::span<const double> fhat,
                               std::span<const double> ts, std::size_t n, int max_a = 5);

struct CorrelationRow {
  int distance = 0;
  double max_abs_correlation = 0.0;
};
struct CorrelationDecay {
  std::vector<CorrelationRow> rows;  // distance 1, 2, ...
  bool strictly_decreasing = false;
};
// Exact centered pair correlations E[x_i x_j] - E[x_i] E[x_j] under pi,
// grouped by graph distance.
CorrelationDecay correlation_decay_check(const IsingModel& model);

// Boolean functions used by the experiments. Ties map to +1.
int majority(std::span<const std::int8_t> x);

struct Halfspace {
  std::vector<double> weights;
  double threshold = 0.0;
  int operator()(std::span<const std::int8_t> x) const;
};
// Standard Gaussian weights, zero threshold.
Halfspace random_halfspace(std::size_t n, RngStream& rng);

}  // namespace mrflearn
