#include "mrflearn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mrflearn/errors.hpp"
#include "mrflearn/parallel.hpp"

namespace mrflearn {

std::string to_string(NoiseMethod method) {
  return method == NoiseMethod::kExact ? "exact" : "sampled";
}

NoiseReport noise_sensitivity_exact(std::span<const double> eigenvalues,
                                    std::span<const double> fhat, double t) {
  if (eigenvalues.size() != fhat.size()) throw InputError("noise sensitivity: coefficient count mismatch");
  if (!(t >= 0.0)) throw InputError("noise sensitivity: t must be nonnegative");
  double stability = 0.0;
  for (std::size_t l = 0; l < fhat.size(); ++l) {
    stability += std::pow(std::max(eigenvalues[l], 0.0), t) * fhat[l] * fhat[l];
  }
  NoiseReport r;
  r.t = t;
  r.ns = t == 0.0 ? 0.0 : 0.5 - 0.5 * stability;
  r.method = NoiseMethod::kExact;
  return r;
}

StateSampler exact_pi_sampler(std::shared_ptr<const SupportIndex> support, std::vector<double> pi) {
  if (pi.size() != support->size()) throw InputError("exact sampler: distribution length mismatch");
  std::vector<double> cdf(pi.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) cdf[i] = acc += pi[i];
  for (double& c : cdf) c /= acc;
  return [support, cdf = std::move(cdf)](RngStream& rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return support->state(static_cast<std::size_t>(it - cdf.begin()));
  };
}

StateSampler burn_in_sampler(const ChainOracle& oracle, std::size_t burn_in) {
  return [oracle, burn_in](RngStream& rng) {
    return sample_stationary_iid(oracle, burn_in, 1, rng).front();
  };
}

NoiseReport noise_sensitivity_sampled(const ChainOracle& oracle, const LabelFunction& f,
                                      std::size_t t, std::size_t pairs, std::uint64_t seed,
                                      const StateSampler& sampler, std::size_t workers) {
  if (pairs == 0) throw InputError("noise sensitivity: need at least one pair");
  std::vector<char> differ(pairs, 0);
  parallel_for(pairs, workers, [&](std::size_t p) {
    RngStream rng(seed, {p});
    Configuration x = sampler(rng);
    const int fx = f(x);
    oracle.run(x, t, rng);
    differ[p] = f(x) != fx;
  });
  const auto count = static_cast<double>(std::count(differ.begin(), differ.end(), 1));
  NoiseReport r;
  r.t = static_cast<double>(t);
  r.ns = count / static_cast<double>(pairs);
  r.method = NoiseMethod::kSampled;
  r.pairs = pairs;
  r.std_error = std::sqrt(r.ns * (1.0 - r.ns) / static_cast<double>(pairs));
  return r;
}

TailCheck tail_mass_check(std::span<const double> eigenvalues, std::span<const double> fhat, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("tail check: rho must lie in (0, 1)");
  if (eigenvalues.size() != fhat.size()) throw InputError("tail check: coefficient count mismatch");
  TailCheck c;
  c.rho = rho;
  c.t = -1.0 / std::log(rho);
  for (std::size_t l = 0; l < eigenvalues.size(); ++l) {
    if (eigenvalues[l] > rho) c.ell_star = l + 1;
    else c.tail += fhat[l] * fhat[l];
  }
  c.bound = std::numbers::e / (std::numbers::e - 1.0) * noise_sensitivity_exact(eigenvalues, fhat, c.t).ns;
  c.slack = c.bound - c.tail;
  c.corrected_bound = 2.0 * c.bound;
  c.corrected_slack = c.corrected_bound - c.tail;
  return c;
}

StabilityCurve stability_curve(std::span<const double> eigenvalues, std::span<const double> fhat,
                               std::span<const double> ts, std::size_t n, int max_a) {
  if (n == 0) throw InputError("stability curve: n must be positive");
  StabilityCurve curve;
  double sxy = 0.0;
  double sxx = 0.0;
  curve.worst_jensen_slack = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    const double ns = noise_sensitivity_exact(eigenvalues, fhat, t).ns;
    const double st = 1.0 - 2.0 * ns;
    curve.points.push_back({t, ns, st});
    if (st > 0.0 && t > 0.0) {
      const double x = t / static_cast<double>(n);
      sxy += x * std::log(st);
      sxx += x * x;
    }
    for (int a = 2; a <= max_a; ++a) {
      const double lhs = 1.0 - 2.0 * noise_sensitivity_exact(eigenvalues, fhat, a * t).ns;
      curve.worst_jensen_slack = std::min(curve.worst_jensen_slack, lhs - std::pow(st, a));
    }
  }
  curve.fitted_exponent = sxx > 0.0 ? -sxy / sxx : 0.0;
  if (!std::isfinite(curve.worst_jensen_slack)) curve.worst_jensen_slack = 0.0;
  return curve;
}

CorrelationDecay correlation_decay_check(const IsingModel& model) {
  const MrfModel m = model;
  const auto support = enumerate_support(m);
  const auto pi = stationary_exact(*support);
  const std::size_t n = support->num_sites();
  std::vector<double> mean(n, 0.0);
  std::vector<double> pair(n * n, 0.0);
  for (std::size_t k = 0; k < support->size(); ++k) {
    const auto x = support->values(k);
    for (std::size_t i = 0; i < n; ++i) {
      mean[i] += pi[k] * x[i];
      for (std::size_t j = i + 1; j < n; ++j) pair[i * n + j] += pi[k] * x[i] * x[j];
    }
  }
  const auto dist = model.graph().distances();
  int max_d = 0;
  for (const auto& row : dist) {
    for (int d : row) max_d = std::max(max_d, d);
  }
  CorrelationDecay out;
  out.rows.resize(max_d);
  for (int d = 1; d <= max_d; ++d) out.rows[d - 1].distance = d;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int d = dist[i][j];
      if (d <= 0) continue;
      const double c = std::fabs(pair[i * n + j] - mean[i] * mean[j]);
      out.rows[d - 1].max_abs_correlation = std::max(out.rows[d - 1].max_abs_correlation, c);
    }
  }
  out.strictly_decreasing = true;
  for (std::size_t r = 1; r < out.rows.size(); ++r) {
    if (!(out.rows[r].max_abs_correlation < out.rows[r - 1].max_abs_correlation)) out.strictly_decreasing = false;
  }
  return out;
}

int majority(std::span<const std::int8_t> x) {
  int s = 0;
  for (auto v : x) s += v;
  return s >= 0 ? 1 : -1;
}

int Halfspace::operator()(std::span<const std::int8_t> x) const {
  double s = -threshold;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
  return s >= 0.0 ? 1 : -1;
}

Halfspace random_halfspace(std::size_t n, RngStream& rng) {
  std::normal_distribution<double> normal;
  Halfspace h;
  h.weights.resize(n);
  for (double& w : h.weights) w = normal(rng);
  return h;
}

}  // namespace mrflearn
