// Experiment drivers: spectra, majority approximation table, stability
// curves, junta recovery and end-to-end agnostic learning.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mrflearn/features.hpp"
#include "mrflearn/graph.hpp"
#include "mrflearn/junta.hpp"
#include "mrflearn/models.hpp"
#include "mrflearn/noise.hpp"
#include "mrflearn/support.hpp"

namespace mrflearn {

struct SpectrumTable {
  std::vector<double> betas;
  std::vector<std::vector<double>> eigenvalues;  // one descending column per beta
};
SpectrumTable spectrum_experiment(const Graph& graph, std::span<const double> betas);

enum class EigenCountPolicy {
  // M = sum_{j <= k} C(n, j), the dimension of degree-k polynomials.
  kDimensionMatched,
  // M = n^k, capped at the number of states.
  kLiteral,
};
std::string to_string(EigenCountPolicy policy);
EigenCountPolicy parse_eigen_count_policy(const std::string& name);
std::size_t eigen_count(EigenCountPolicy policy, std::size_t n, std::size_t k, std::size_t states);

struct ApproximationRow {
  std::string graph;
  double beta = 0.0;
  std::size_t degree = 0;
  double poly_error = 0.0;
  double eigen_error = 0.0;
  std::size_t eigen_count = 0;
  std::uint64_t graph_seed = 0;
};

struct MajorityTableSpec {
  GraphKind kind = GraphKind::kComplete;
  std::size_t n = 11;
  double p = 0.3;  // Erdos-Renyi edge probability
  std::vector<double> betas;
  std::vector<std::size_t> degrees{2, 4};
  EigenCountPolicy policy = EigenCountPolicy::kDimensionMatched;
  std::vector<std::uint64_t> graph_seeds{0};
  std::size_t workers = 1;
};

// min E_pi[(f - p)^2] over polynomials of degree <= k in the spins, from the
// damped (1e-10) Gram system over the monomials.
double polynomial_error(const SupportIndex& support, std::span<const double> pi,
                        std::span<const double> f, std::size_t k);

// f = majority; rows ordered by seed, beta, degree.
std::vector<ApproximationRow> majority_table(const MajorityTableSpec& spec);

// Exact spectral stability curve for f on an enumerable model.
StabilityCurve stability_experiment(const MrfModel& model, const LabelFunction& f,
                                    std::span<const double> ts);

struct JuntaTarget {
  std::vector<int> variables;       // ascending
  std::size_t alphabet = 2;
  bool spins = true;
  std::vector<std::int8_t> table;   // label per assignment code, first variable most significant
  int operator()(std::span<const std::int8_t> x) const;
};

// A uniformly random truth table on k uniformly random variables, redrawn
// until every variable is relevant on the support.
JuntaTarget random_junta(const SupportIndex& support, std::size_t k, RngStream& rng);

struct JuntaTrial {
  std::uint64_t seed = 0;
  bool recovered = false;
  std::size_t walk_length = 0;
  std::vector<int> target_variables;
  std::vector<int> found_variables;
};

struct JuntaExperimentSpec {
  std::size_t k = 3;
  double delta = 0.05;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  std::size_t walk_length = 0;  // 0: derive from the chain conditions
};

struct JuntaExperimentResult {
  JuntaConditions conditions;
  std::size_t mixing_time = 0;
  std::size_t walk_length = 0;
  std::vector<JuntaTrial> trials;
  double success_rate = 0.0;
};

// Each trial draws a random k-junta and an exact stationary start, runs one
// labeled walk of the derived length and checks exact recovery: the learned
// variable set equals the target's and h agrees with f on every support state.
JuntaExperimentResult junta_experiment(const MrfModel& model, const JuntaExperimentSpec& spec);

struct AgnosticSpec {
  std::size_t basis_degree = 2;       // conjunctions on at most this many variables
  std::size_t tau_max = 30;
  std::size_t samples_T = 0;          // 0: hoeffding_T(epsilon2, delta, tau_max |X| |G|)
  double epsilon2 = 0.05;
  double delta = 0.01;
  std::size_t train_size = 3000;
  std::size_t validation_size = 1000;
  std::vector<double> budgets{1.0, 4.0, 16.0};
  std::vector<std::uint64_t> seeds{1};
  std::size_t opt_junta_size = 3;
  std::vector<std::size_t> time_grid;  // empty: every t
  SeedScheme scheme = SeedScheme::kSharedEndpoints;
  std::size_t workers = 1;
};

struct AgnosticRow {
  std::uint64_t seed = 0;
  double err = 0.0;        // theta-expected error under exact pi
  double opt = 0.0;        // best junta error under exact pi
  double budget = 0.0;     // W chosen on the validation set
  std::size_t tau_max = 0;
  std::size_t samples_T = 0;
  std::vector<double> validation_errors;  // per candidate W
  double training_objective = 0.0;
};

// Target: majority (ties to +1). Requires an enumerable model.
std::vector<AgnosticRow> agnostic_experiment(const MrfModel& model, const AgnosticSpec& spec);

}  // namespace mrflearn
