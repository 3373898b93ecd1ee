#include "mrflearn/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mrflearn/errors.hpp"
#include "mrflearn/kernels.hpp"
#include "mrflearn/rng.hpp"

namespace mrflearn {

void L1Problem::validate() const {
  if (y.size() != phi.rows()) throw InputError("L1 problem: label count does not match rows");
  if (!(budget >= 0.0) || !std::isfinite(budget)) throw InputError("L1 problem: budget must be finite and >= 0");
  if (!row_weights.empty()) {
    if (row_weights.size() != y.size()) throw InputError("L1 problem: row weight count mismatch");
    for (double r : row_weights) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("L1 problem: row weights must be finite and >= 0");
    }
  }
  for (double v : phi.data()) {
    if (!std::isfinite(v)) throw InputError("L1 problem: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw InputError("L1 problem: non-finite label");
  }
}

double predict_linear(std::span<const double> w, std::span<const double> features) {
  if (w.size() != features.size()) throw InputError("predict_linear: length mismatch");
  return kernels::dot(w, features);
}

double l1_objective(const L1Problem& problem, std::span<const double> w) {
  double total = 0.0;
  for (std::size_t i = 0; i < problem.y.size(); ++i) {
    const double rho = problem.row_weights.empty() ? 1.0 : problem.row_weights[i];
    total += rho * std::fabs(predict_linear(w, problem.phi.row(i)) - problem.y[i]);
  }
  return total;
}

L1Problem merge_duplicate_rows(const L1Problem& problem) {
  problem.validate();
  std::map<std::pair<std::vector<double>, double>, std::size_t> seen;
  L1Problem out;
  out.budget = problem.budget;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < problem.y.size(); ++i) {
    const double rho = problem.row_weights.empty() ? 1.0 : problem.row_weights[i];
    std::vector<double> row(problem.phi.row(i).begin(), problem.phi.row(i).end());
    auto [it, inserted] = seen.try_emplace({std::move(row), problem.y[i]}, keep.size());
    if (inserted) {
      keep.push_back(i);
      out.y.push_back(problem.y[i]);
      out.row_weights.push_back(rho);
    } else {
      out.row_weights[it->second] += rho;
    }
  }
  out.phi = DenseMatrix(keep.size(), problem.phi.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    std::copy(problem.phi.row(keep[r]).begin(), problem.phi.row(keep[r]).end(), out.phi.row(r).begin());
  }
  return out;
}

namespace {

// Tableau over the stored columns [w+ (f), u+ (s), slack]. The remaining
// variables are implied: the w- column equals -(w+ column) + 2 (slack column)
// and the u- column equals -(u+ column), in every tableau, because those
// identities hold for the original constraint columns.
class Tableau {
 public:
  Tableau(const DenseMatrix& phi, const std::vector<std::size_t>& cols, std::span<const double> y,
          std::span<const double> rho, double budget)
      : s_(y.size()), f_(cols.size()), width_(f_ + s_ + 1), rows_(s_ + 1), rho_(rho.begin(), rho.end()) {
    t_.assign(rows_ * width_, 0.0);
    rhs_.assign(rows_, 0.0);
    basis_.assign(rows_, 0);
    for (std::size_t i = 0; i < s_; ++i) {
      const double sign = y[i] >= 0.0 ? 1.0 : -1.0;
      double* row = &t_[i * width_];
      for (std::size_t k = 0; k < f_; ++k) row[k] = sign * phi(i, cols[k]);
      row[f_ + i] = -sign;
      rhs_[i] = sign * y[i];
      basis_[i] = sign > 0.0 ? u_minus(i) : u_plus(i);
    }
    double* budget_row = &t_[s_ * width_];
    for (std::size_t k = 0; k < f_; ++k) budget_row[k] = 1.0;
    budget_row[f_ + s_] = 1.0;
    rhs_[s_] = budget;
    basis_[s_] = slack();
    is_basic_.assign(num_vars(), 0);
    for (std::size_t b : basis_) is_basic_[b] = 1;

    // The primal phase runs on a slightly perturbed right-hand side, which
    // removes the heavy degeneracy of zero residuals. The true one is carried
    // along and restored for the dual cleanup.
    rhs0_ = rhs_;
    RngStream rng(0x5EEDu);
    for (double& r : rhs_) r += 1e-7 * (1.0 + std::fabs(r)) * (1.0 + rng.uniform());

    // Reduced costs d_j = c_j - c_B^T column_j over the stored columns.
    d_.assign(width_, 0.0);
    for (std::size_t j = 0; j < width_; ++j) d_[j] = stored_cost(j);
    for (std::size_t i = 0; i < s_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) kernels::active().axpy(-cb, &t_[i * width_], d_.data(), width_);
    }
    double top = 1.0;
    for (double r : rho_) top = std::max(top, r);
    cost_tol_ = 1e-9 * top;
  }

  // Variable ids, ordered for Bland's rule.
  std::size_t w_plus(std::size_t k) const { return k; }
  std::size_t w_minus(std::size_t k) const { return f_ + k; }
  std::size_t u_plus(std::size_t i) const { return 2 * f_ + i; }
  std::size_t u_minus(std::size_t i) const { return 2 * f_ + s_ + i; }
  std::size_t slack() const { return 2 * f_ + 2 * s_; }
  std::size_t num_vars() const { return 2 * f_ + 2 * s_ + 1; }

  double cost(std::size_t v) const {
    if (v >= 2 * f_ && v < 2 * f_ + 2 * s_) return rho_[(v - 2 * f_) % s_];
    return 0.0;
  }
  double stored_cost(std::size_t j) const { return (j >= f_ && j < f_ + s_) ? rho_[j - f_] : 0.0; }

  double reduced_cost(std::size_t v) const {
    if (v < f_) return d_[v];
    if (v < 2 * f_) return 2.0 * d_[f_ + s_] - d_[v - f_];
    if (v < 2 * f_ + s_) return d_[f_ + (v - 2 * f_)];
    if (v < 2 * f_ + 2 * s_) {
      const std::size_t i = v - 2 * f_ - s_;
      return 2.0 * rho_[i] - d_[f_ + i];
    }
    return d_[f_ + s_];
  }

  double entry(std::size_t r, std::size_t v) const {
    const double* row = &t_[r * width_];
    if (v < f_) return row[v];
    if (v < 2 * f_) return -row[v - f_] + 2.0 * row[f_ + s_];
    if (v < 2 * f_ + s_) return row[f_ + (v - 2 * f_)];
    if (v < 2 * f_ + 2 * s_) return -row[f_ + (v - 2 * f_ - s_)];
    return row[f_ + s_];
  }

  std::size_t choose_entering(bool bland, const std::vector<char>& skip) const {
    std::size_t best = npos;
    double best_d = -cost_tol_;
    for (std::size_t v = 0; v < num_vars(); ++v) {
      if (is_basic_[v] || skip[v]) continue;
      const double d = reduced_cost(v);
      if (d < best_d) {
        best = v;
        if (bland) return v;
        best_d = d;
      }
    }
    return best;
  }

  std::size_t choose_leaving(std::size_t v, double& ratio) const {
    constexpr double kPivotTol = 1e-9;
    std::size_t best = npos;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = entry(r, v);
      if (a <= kPivotTol) continue;
      const double q = std::max(rhs_[r], 0.0) / a;
      const double slop = 1e-12 * std::max(1.0, ratio);
      if (best == npos || q < ratio - slop) {
        best = r;
        ratio = q;
      } else if (q <= ratio + slop && basis_[r] < basis_[best]) {
        best = r;
        ratio = std::min(ratio, q);
      }
    }
    return best;
  }

  void pivot(std::size_t p, std::size_t v) {
    const auto& k = kernels::active();
    std::vector<double> column(rows_);
    for (std::size_t r = 0; r < rows_; ++r) column[r] = entry(r, v);
    const double dq = reduced_cost(v);
    const double inv = 1.0 / column[p];
    double* prow = &t_[p * width_];
    k.scale(inv, prow, width_);
    rhs_[p] *= inv;
    rhs0_[p] *= inv;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == p || column[r] == 0.0) continue;
      k.axpy(-column[r], prow, &t_[r * width_], width_);
      rhs_[r] -= column[r] * rhs_[p];
      rhs0_[r] -= column[r] * rhs0_[p];
    }
    if (dq != 0.0) k.axpy(-dq, prow, d_.data(), width_);
    is_basic_[basis_[p]] = 0;
    is_basic_[v] = 1;
    basis_[p] = v;
  }

  void restore_rhs() { rhs_ = rhs0_; }

  // Dual simplex row choice: the most negative basic value.
  std::size_t dual_leaving(double tol) const {
    std::size_t best = npos;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (rhs_[r] >= -tol) continue;
      if (best == npos || rhs_[r] < rhs_[best]) best = r;
    }
    return best;
  }

  // Dual ratio test on row r; keeps every reduced cost nonnegative.
  std::size_t dual_entering(std::size_t r) const {
    constexpr double kPivotTol = 1e-9;
    std::size_t best = npos;
    double best_q = 0.0;
    for (std::size_t v = 0; v < num_vars(); ++v) {
      if (is_basic_[v]) continue;
      const double a = entry(r, v);
      if (a >= -kPivotTol) continue;
      const double q = std::max(reduced_cost(v), 0.0) / -a;
      if (best == npos || q < best_q) {
        best = v;
        best_q = q;
      }
    }
    return best;
  }

  std::vector<double> weights() const {
    std::vector<double> w(f_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double val = std::max(rhs_[r], 0.0);
      const std::size_t v = basis_[r];
      if (v < f_) w[v] += val;
      else if (v < 2 * f_) w[v - f_] -= val;
    }
    return w;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t s_, f_, width_, rows_;
  std::vector<double> rho_;
  std::vector<double> t_;
  std::vector<double> rhs_;
  std::vector<double> rhs0_;
  std::vector<char> is_basic_;
  std::vector<double> d_;
  std::vector<std::size_t> basis_;
  double cost_tol_ = 1e-9;
};

}  // namespace

L1Solution solve_l1_regression(const L1Problem& problem) {
  problem.validate();
  const std::size_t s = problem.y.size();
  const std::size_t f = problem.phi.cols();
  std::vector<double> rho = problem.row_weights;
  if (rho.empty()) rho.assign(s, 1.0);

  // Only columns with a nonzero entry can reduce the objective.
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < f; ++k) {
    bool nonzero = false;
    for (std::size_t i = 0; i < s && !nonzero; ++i) nonzero = problem.phi(i, k) != 0.0;
    if (nonzero) cols.push_back(k);
  }

  L1Solution sol;
  sol.w.assign(f, 0.0);
  if (s > 0 && !cols.empty() && problem.budget > 0.0) {
    Tableau tab(problem.phi, cols, problem.y, rho, problem.budget);
    constexpr std::size_t kStallLimit = 64;
    const std::size_t max_pivots = 100 * (tab.num_vars() + s + 1);
    std::size_t stall = 0;
    // The feasible set has no improving ray, so an entering column without a
    // positive entry is round-off; it is set aside until the next pivot.
    std::vector<char> skip(tab.num_vars(), 0);
    std::size_t skipped = 0;
    for (;;) {
      const std::size_t v = tab.choose_entering(sol.bland_mode, skip);
      if (v == Tableau::npos) break;
      double ratio = 0.0;
      const std::size_t p = tab.choose_leaving(v, ratio);
      if (p == Tableau::npos) {
        skip[v] = 1;
        ++skipped;
        continue;
      }
      if (skipped > 0) {
        std::fill(skip.begin(), skip.end(), 0);
        skipped = 0;
      }
      tab.pivot(p, v);
      ++sol.pivots;
      if (ratio <= 1e-14) {
        ++sol.degenerate_pivots;
        if (++stall >= kStallLimit) sol.bland_mode = true;
      } else {
        stall = 0;
      }
      if (sol.pivots > max_pivots) throw NumericalError("L1 simplex: pivot limit exceeded");
    }
    tab.restore_rhs();
    for (;;) {
      const std::size_t r = tab.dual_leaving(1e-11);
      if (r == Tableau::npos) break;
      const std::size_t v = tab.dual_entering(r);
      if (v == Tableau::npos) throw NumericalError("L1 simplex: dual cleanup found no entering column");
      tab.pivot(r, v);
      ++sol.pivots;
      ++sol.dual_pivots;
      if (sol.pivots > max_pivots) throw NumericalError("L1 simplex: pivot limit exceeded");
    }
    const auto w = tab.weights();
    for (std::size_t k = 0; k < cols.size(); ++k) sol.w[cols[k]] = w[k];
  }
  double mass = 0.0;
  for (double v : sol.w) mass += std::fabs(v);
  if (mass > problem.budget) {
    const double shrink = problem.budget / mass;
    for (double& v : sol.w) v *= shrink;
  }
  sol.objective = l1_objective(problem, sol.w);
  return sol;
}

}  // namespace mrflearn
