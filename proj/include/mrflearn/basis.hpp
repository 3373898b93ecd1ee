// Bounded basis families g : X -> [-1, 1].
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mrflearn/matrix.hpp"
#include "mrflearn/models.hpp"
#include "mrflearn/support.hpp"

namespace mrflearn {

enum class BasisKind { kParity, kConjunction, kLocal, kCustom };

std::string to_string(BasisKind kind);

using BasisEvaluator = std::function<double(std::span<const std::int8_t>)>;

struct BasisFunction {
  std::string name;
  BasisKind kind = BasisKind::kCustom;
  std::vector<int> sites;
  // Conjunction: required spin per site. Local: indicated symbol per site.
  std::vector<std::int8_t> pattern;
  // Local: the centering frequency subtracted from each indicator.
  std::vector<double> centers;
  double scale = 1.0;
  std::shared_ptr<const BasisEvaluator> custom;

  double operator()(std::span<const std::int8_t> x) const;
  double operator()(const Configuration& x) const { return (*this)(std::span(x.values)); }
};

struct BasisFamily {
  BasisKind kind = BasisKind::kCustom;
  std::vector<BasisFunction> functions;

  std::size_t size() const { return functions.size(); }
  const BasisFunction& operator[](std::size_t m) const { return functions[m]; }
  auto begin() const { return functions.begin(); }
  auto end() const { return functions.end(); }
};

// Subsets are listed by size, then lexicographically; the empty set first.
BasisFamily parity_family(std::size_t n, std::size_t k);
// 2 * prod_{i in S} 1(x_i = b_i) - 1 for 1 <= |S| <= k and every sign pattern b
// (patterns in lexicographic order with -1 before +1).
BasisFamily conjunction_family(std::size_t n, std::size_t k);

struct LocalIndicatorOptions {
  // Used only when the support is too large to enumerate.
  std::size_t sample_count = 100000;
  std::uint64_t seed = 0;
  std::uint64_t state_cap = kDefaultStateCap;
};
// prod_{i in S} (1(x_i = b_i) - freq_i(b_i)), rescaled into [-1, 1].
BasisFamily local_indicator_family(const MrfModel& model, std::size_t k,
                                   const LocalIndicatorOptions& options = {});

BasisFunction custom_basis_function(std::string name, BasisEvaluator fn);

// Row m holds g_m on the support states.
DenseMatrix tabulate(const BasisFamily& family, const SupportIndex& support);

}  // namespace mrflearn
