#include "mrflearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mrflearn/errors.hpp"

namespace mrflearn {

void LearnerConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("learner: epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("learner: delta must lie in (0, 1)");
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw InputError("learner: W must be finite and >= 0");
  if (samples < 1) throw InputError("learner: sample count must be at least 1");
  features.validate();
}

double Hypothesis::value(std::span<const double> feature_row) const {
  const double h = predict_linear(weights, feature_row);
  return clip ? std::clamp(h, -1.0, 1.0) : h;
}

Hypothesis fit_hypothesis(const FeatureSet& features, const BasisFamily& family,
                          std::span<const int> labels, double budget) {
  if (labels.size() != features.rows()) throw InputError("fit_hypothesis: label count mismatch");
  L1Problem problem;
  problem.phi = features.phi;
  problem.y.assign(labels.begin(), labels.end());
  problem.budget = budget;
  const L1Solution sol = solve_l1_regression(merge_duplicate_rows(problem));
  Hypothesis h;
  h.weights = sol.w;
  h.descriptors = features.descriptors;
  h.family = family;
  h.features = features.config;
  h.feature_seed = features.master_seed;
  h.budget = budget;
  h.training_objective = l1_objective(problem, sol.w);
  h.pivots = sol.pivots;
  return h;
}

Hypothesis agnostic_learn(const ChainOracle& oracle, const BasisFamily& family,
                          const LabeledSample& sample, const LearnerConfig& config,
                          std::uint64_t seed) {
  config.validate();
  if (sample.xs.size() != sample.y.size()) throw InputError("agnostic_learn: label count mismatch");
  for (int v : sample.y) {
    if (v != 1 && v != -1) throw InputError("agnostic_learn: labels must be +1 or -1");
  }
  FeatureBuildOptions options;
  options.workers = config.workers;
  const FeatureSet fs = build_feature_set(oracle, family, sample.xs, config.features, seed, options);
  return fit_hypothesis(fs, family, sample.y, config.budget);
}

std::vector<double> hypothesis_values(const Hypothesis& h, const FeatureSet& features) {
  if (features.descriptors != h.descriptors) throw InputError("hypothesis_values: feature layout mismatch");
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.value(features.phi.row(i));
  return out;
}

std::vector<double> hypothesis_values(const Hypothesis& h, const ChainOracle& oracle,
                                      const std::vector<Configuration>& xs, std::size_t workers) {
  FeatureBuildOptions options;
  options.workers = workers;
  return hypothesis_values(h, build_feature_set(oracle, h.family, xs, h.features, h.feature_seed, options));
}

double randomized_threshold_error(std::span<const double> h, std::span<const double> y,
                                  std::span<const double> weights) {
  if (h.size() != y.size() || (!weights.empty() && weights.size() != y.size())) {
    throw InputError("randomized_threshold_error: length mismatch");
  }
  if (h.empty()) return 0.0;
  double total = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w * std::fabs(std::clamp(h[i], -1.0, 1.0) - y[i]) / 2.0;
    mass += w;
  }
  return total / mass;
}

ErrorReport empirical_error(std::span<const double> h, std::span<const double> y, RngStream& rng) {
  ErrorReport r;
  r.expected = randomized_threshold_error(h, y);
  if (h.empty()) return r;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double theta = 2.0 * rng.uniform() - 1.0;
    const int prediction = h[i] - theta >= 0.0 ? 1 : -1;
    if (prediction != (y[i] >= 0.0 ? 1 : -1)) ++wrong;
  }
  r.sampled = static_cast<double>(wrong) / static_cast<double>(h.size());
  return r;
}

double brute_force_opt(const std::vector<std::vector<int>>& class_predictions,
                       std::span<const int> labels, std::span<const double> weights) {
  if (class_predictions.empty()) throw InputError("brute_force_opt: empty hypothesis class");
  if (!weights.empty() && weights.size() != labels.size()) throw InputError("brute_force_opt: weight count mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) mass += weights.empty() ? 1.0 : weights[i];
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pred : class_predictions) {
    if (pred.size() != labels.size()) throw InputError("brute_force_opt: prediction length mismatch");
    double err = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (pred[i] != labels[i]) err += weights.empty() ? 1.0 : weights[i];
    }
    best = std::min(best, err);
  }
  return mass > 0.0 ? best / mass : 0.0;
}

double best_junta_error(const std::vector<Configuration>& xs, std::span<const int> labels,
                        std::span<const double> weights, std::size_t k) {
  if (xs.size() != labels.size() || (!weights.empty() && weights.size() != labels.size())) {
    throw InputError("best_junta_error: length mismatch");
  }
  if (xs.empty()) return 0.0;
  const std::size_t n = xs.front().size();
  double mass = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mass += weights.empty() ? 1.0 : weights[i];
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> s;
  auto evaluate = [&] {
    std::map<std::vector<std::int8_t>, std::pair<double, double>> cells;
    std::vector<std::int8_t> key(s.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) key[j] = xs[i][s[j]];
      auto& cell = cells[key];
      (labels[i] > 0 ? cell.first : cell.second) += weights.empty() ? 1.0 : weights[i];
    }
    double err = 0.0;
    for (const auto& [_, c] : cells) err += std::min(c.first, c.second);
    best = std::min(best, err);
  };
  // Juntas on a set include all juntas on its subsets, so sets of size
  // exactly min(k, n) suffice.
  const std::size_t size = std::min(k, n);
  s.resize(size);
  for (std::size_t i = 0; i < size; ++i) s[i] = static_cast<int>(i);
  for (;;) {
    evaluate();
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(size) - 1;
    while (i >= 0 && s[i] == static_cast<int>(n - size + i)) --i;
    if (i < 0) break;
    ++s[i];
    for (std::size_t j = i + 1; j < size; ++j) s[j] = s[j - 1] + 1;
  }
  return best / mass;
}

}  // namespace mrflearn
