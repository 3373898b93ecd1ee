// Pairwise Markov random fields: the Ising model and proper q-colorings.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrflearn/graph.hpp"

namespace mrflearn {

// An assignment of one symbol per node. Ising spins are stored as -1/+1,
// colors as 0..q-1 (the 1-based colors [q] of the usual notation shifted down).
struct Configuration {
  std::vector<std::int8_t> values;

  Configuration() = default;
  explicit Configuration(std::vector<std::int8_t> v) : values(std::move(v)) {}
  Configuration(std::initializer_list<int> v) {
    values.reserve(v.size());
    for (int x : v) values.push_back(static_cast<std::int8_t>(x));
  }

  std::size_t size() const { return values.size(); }
  std::int8_t operator[](std::size_t i) const { return values[i]; }
  std::int8_t& operator[](std::size_t i) { return values[i]; }
  bool operator==(const Configuration&) const = default;
};

class IsingModel {
 public:
  // beta holds one coupling per graph edge, in graph edge order.
  IsingModel(Graph graph, std::vector<double> beta, double field = 0.0);
  static IsingModel uniform(Graph graph, double beta, double field = 0.0);

  const Graph& graph() const { return graph_; }
  std::span<const double> beta() const { return beta_; }
  double field() const { return field_; }
  std::size_t num_sites() const { return graph_.num_nodes(); }
  // True when every edge carries the same coupling.
  bool uniform_coupling() const { return uniform_; }

  // sum_{j in N(i)} beta_ij x_j + B
  double local_field(const Configuration& x, std::size_t i) const;

 private:
  Graph graph_;
  std::vector<double> beta_;
  double field_ = 0.0;
  bool uniform_ = true;
};

class ColoringModel {
 public:
  ColoringModel(Graph graph, int q);

  const Graph& graph() const { return graph_; }
  int q() const { return q_; }
  std::size_t num_sites() const { return graph_.num_nodes(); }
  // q >= 3 * max degree: the regime where the dynamics is known to mix rapidly.
  // Advisory only.
  bool rapid_mixing_guaranteed() const;

  // Bitmask of colors not used by any neighbor of i (bit c set = color c free).
  std::uint64_t free_colors(const Configuration& c, std::size_t i) const;

 private:
  Graph graph_;
  int q_ = 1;
};

using MrfModel = std::variant<IsingModel, ColoringModel>;

std::size_t num_sites(const MrfModel& model);
std::size_t alphabet_size(const MrfModel& model);
const Graph& graph_of(const MrfModel& model);
bool is_ising(const MrfModel& model);

// -sum_{(i,j) in E} beta_ij s_i s_j - B sum_i s_i
double hamiltonian(const IsingModel& model, const Configuration& sigma);
// Ising: -H(x). Coloring: 0 for proper colorings, -infinity otherwise.
double log_stationary_weight(const MrfModel& model, const Configuration& x);
bool is_valid_coloring(const ColoringModel& model, const Configuration& c);
std::size_t hamming_distance(const Configuration& x, const Configuration& y);

// Throws InputError unless x has the model's length and alphabet.
void check_shape(const MrfModel& model, const Configuration& x);

// Mixed-radix code of x with x_0 most significant, so code order is
// lexicographic order of the value sequences (spin -1 sorts before +1).
std::uint64_t encode(const MrfModel& model, const Configuration& x);
Configuration decode(const MrfModel& model, std::uint64_t code);
// |A|^n, or 0 if it does not fit in 64 bits.
std::uint64_t code_space_size(const MrfModel& model);

// Heat-bath acceptance 1 / (1 + exp(dH)) for a move that changes the energy by dH.
double heat_bath_probability(double delta_energy);
// Probability that the Ising heat-bath update at site i flips the spin,
// given that the site was selected and the lazy coin said "move".
double ising_flip_probability(const IsingModel& model, const Configuration& x, std::size_t i);

// Canonical text description used for hashing and the model file format.
std::string describe(const MrfModel& model);

}  // namespace mrflearn
