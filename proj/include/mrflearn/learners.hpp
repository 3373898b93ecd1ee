// Agnostic learning with MCMC spectral features, plus error measures.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mrflearn/basis.hpp"
#include "mrflearn/features.hpp"
#include "mrflearn/gibbs.hpp"
#include "mrflearn/regression.hpp"

namespace mrflearn {

struct LearnerConfig {
  double epsilon = 0.1;
  double delta = 0.05;
  double budget = 1.0;  // W
  FeatureConfig features;
  std::size_t samples = 1000;  // s
  std::size_t burn_in = 0;     // 0 selects default_burn_in(n)
  std::size_t workers = 1;

  void validate() const;
};

struct LabeledSample {
  std::vector<Configuration> xs;
  std::vector<int> y;  // +1 / -1
};

struct Hypothesis {
  std::vector<double> weights;  // aligned with descriptors
  std::vector<std::pair<std::size_t, std::size_t>> descriptors;
  BasisFamily family;
  FeatureConfig features;
  std::uint64_t feature_seed = 0;
  double budget = 0.0;
  bool clip = true;
  double training_objective = 0.0;
  std::size_t pivots = 0;

  // h on a feature row, clipped to [-1, 1] when clip is set.
  double value(std::span<const double> feature_row) const;
};

// Builds features for the sample, solves the L1 program with budget W and
// returns h = sum w_{t,m} phi_{t,m}. Features of later queries must be built
// with the stored seed and configuration (see hypothesis_values).
Hypothesis agnostic_learn(const ChainOracle& oracle, const BasisFamily& family,
                          const LabeledSample& sample, const LearnerConfig& config,
                          std::uint64_t seed);

// Same, on a prebuilt feature set (rows aligned with labels).
Hypothesis fit_hypothesis(const FeatureSet& features, const BasisFamily& family,
                          std::span<const int> labels, double budget);

std::vector<double> hypothesis_values(const Hypothesis& h, const FeatureSet& features);
std::vector<double> hypothesis_values(const Hypothesis& h, const ChainOracle& oracle,
                                      const std::vector<Configuration>& xs, std::size_t workers = 1);

// mean_i |clip(h_i) - y_i| / 2: the exact expectation over theta ~ U[-1, 1]
// of the error of sign(h - theta). Optional weights give a weighted mean.
double randomized_threshold_error(std::span<const double> h, std::span<const double> y,
                                  std::span<const double> weights = {});

struct ErrorReport {
  double expected = 0.0;  // theta-expected error
  double sampled = 0.0;   // one theta draw per prediction
};
ErrorReport empirical_error(std::span<const double> h, std::span<const double> y, RngStream& rng);

// min over the class of the weighted disagreement with the labels; each
// class member is given by its +-1 predictions on the points.
double brute_force_opt(const std::vector<std::vector<int>>& class_predictions,
                       std::span<const int> labels, std::span<const double> weights = {});

// Exact opt over all juntas on at most k variables: for each variable set the
// best truth table labels every assignment by its weighted majority.
double best_junta_error(const std::vector<Configuration>& xs, std::span<const int> labels,
                        std::span<const double> weights, std::size_t k);

}  // namespace mrflearn
