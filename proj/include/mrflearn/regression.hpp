// Exact L1 regression under an L1 budget:
//   minimize sum_i rho_i |Phi_i . w - y_i|  subject to  sum_k |w_k| <= W.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrflearn/matrix.hpp"

namespace mrflearn {

struct L1Problem {
  DenseMatrix phi;                   // examples x features
  std::vector<double> y;
  double budget = 0.0;               // W
  std::vector<double> row_weights;   // rho_i; empty means all ones

  void validate() const;
};

struct L1Solution {
  std::vector<double> w;
  double objective = 0.0;  // recomputed from w
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
  bool bland_mode = false;  // pure Bland pricing was needed to escape stalling
  std::size_t dual_pivots = 0;  // cleanup pivots after restoring the exact right-hand side
};

// Dense primal simplex on w = w+ - w-, residual slacks and a budget slack.
// The starting basis (residual slacks plus budget slack) is feasible, so no
// phase one is needed. The primal phase runs on a right-hand side perturbed
// by about 1e-7 to escape degeneracy; pricing is Dantzig's rule with
// lowest-index ties, switching to Bland's rule after a run of degenerate
// pivots. The exact right-hand side is then restored and any basic value
// that turned negative is repaired by dual simplex pivots, so the final
// basis is optimal for the unperturbed program.
L1Solution solve_l1_regression(const L1Problem& problem);

// Merges identical (row, label) pairs into one row carrying their count as weight.
L1Problem merge_duplicate_rows(const L1Problem& problem);

double predict_linear(std::span<const double> w, std::span<const double> features);

double l1_objective(const L1Problem& problem, std::span<const double> w);

}  // namespace mrflearn
