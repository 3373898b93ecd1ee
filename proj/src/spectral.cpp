#include "mrflearn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <numeric>
#include <string>

#include "mrflearn/eigensolver.hpp"
#include "mrflearn/errors.hpp"
#include "mrflearn/kernels.hpp"

namespace mrflearn {
namespace {

constexpr double kBalanceTolerance = 1e-8;
constexpr double kClamp = 1e-10;
constexpr double kDamping = 1e-10;

void check_pi(const TransitionMatrix& p, std::span<const double> pi) {
  if (p.p.rows() != p.p.cols()) throw InputError("transition matrix is not square");
  if (pi.size() != p.p.rows()) throw InputError("stationary distribution length mismatch");
  for (double v : pi) {
    if (!(v > 0.0)) throw InputError("stationary distribution must be positive on the support");
  }
}

// Indices sorting values descending; ties keep ascending index.
std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

double clamp_eigenvalue(double v) { return (v < 0.0 && v > -kClamp) ? 0.0 : v; }

DenseMatrix symmetrized(const TransitionMatrix& p, std::span<const double> pi) {
  const double violation = detailed_balance_violation(p, pi);
  if (violation > kBalanceTolerance) {
    throw NumericalError("detailed balance violated (relative violation " +
                         std::to_string(violation) + ")");
  }
  const std::size_t s = pi.size();
  std::vector<double> root(s);
  for (std::size_t i = 0; i < s; ++i) root[i] = std::sqrt(pi[i]);
  DenseMatrix a(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i; j < s; ++j) {
      const double v =
          0.5 * (root[i] * p.p(i, j) / root[j] + root[j] * p.p(j, i) / root[i]);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

// Positive-semidefinite solve (K + damping I) x = r via eigendecomposition.
std::vector<double> damped_solve(DenseMatrix k, std::span<const double> r) {
  const std::size_t n = k.rows();
  for (std::size_t i = 0; i < n; ++i) k(i, i) += kDamping;
  const SymmetricEigen eig = symmetric_eigen(std::move(k));
  std::vector<double> x(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    const auto u = eig.vectors.row(l);
    const double coeff = kernels::dot(u, r) / std::max(eig.values[l], kDamping);
    kernels::axpy(coeff, u, x);
  }
  return x;
}

}  // namespace

double detailed_balance_violation(const TransitionMatrix& p, std::span<const double> pi) {
  const std::size_t s = pi.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      const double a = pi[i] * p.p(i, j);
      const double b = pi[j] * p.p(j, i);
      const double top = std::max(a, b);
      if (top > 0.0) worst = std::max(worst, std::fabs(a - b) / top);
    }
  }
  return worst;
}

Spectrum eigendecompose(const TransitionMatrix& p, std::span<const double> pi) {
  check_pi(p, pi);
  const std::size_t s = pi.size();
  SymmetricEigen eig = symmetric_eigen(symmetrized(p, pi));
  const auto order = descending_order(eig.values);

  Spectrum spec;
  spec.support = p.support;
  spec.pi.assign(pi.begin(), pi.end());
  spec.eigenvalues.resize(s);
  spec.eigenvectors = DenseMatrix(s, s);
  std::vector<double> inv_root(s);
  for (std::size_t i = 0; i < s; ++i) inv_root[i] = 1.0 / std::sqrt(pi[i]);
  for (std::size_t l = 0; l < s; ++l) {
    spec.eigenvalues[l] = clamp_eigenvalue(eig.values[order[l]]);
    auto nu = spec.eigenvectors.row(l);
    const auto u = eig.vectors.row(order[l]);
    for (std::size_t i = 0; i < s; ++i) nu[i] = u[i] * inv_root[i];
    const double norm = std::sqrt(inner_product_pi(nu, nu, pi));
    std::size_t peak = 0;
    for (std::size_t i = 1; i < s; ++i) {
      if (std::fabs(nu[i]) > std::fabs(nu[peak])) peak = i;
    }
    kernels::scale(nu[peak] < 0.0 ? -1.0 / norm : 1.0 / norm, nu);
  }
  return spec;
}

SpectralProjection spectral_projection(const TransitionMatrix& p, std::span<const double> pi,
                                       const DenseMatrix& fs) {
  check_pi(p, pi);
  const std::size_t s = pi.size();
  if (fs.cols() != s) throw InputError("spectral_projection: function length mismatch");
  DenseMatrix scaled(fs.rows(), s);
  for (std::size_t j = 0; j < fs.rows(); ++j) {
    for (std::size_t i = 0; i < s; ++i) scaled(j, i) = fs(j, i) * std::sqrt(pi[i]);
  }
  SymmetricProjection proj = symmetric_eigen_project(symmetrized(p, pi), scaled);
  const auto order = descending_order(proj.values);
  SpectralProjection out;
  out.eigenvalues.resize(s);
  out.coefficients = DenseMatrix(s, fs.rows());
  for (std::size_t l = 0; l < s; ++l) {
    out.eigenvalues[l] = clamp_eigenvalue(proj.values[order[l]]);
    const auto src = proj.coefficients.row(order[l]);
    std::copy(src.begin(), src.end(), out.coefficients.row(l).begin());
  }
  return out;
}

std::vector<double> chain_eigenvalues(const TransitionMatrix& p, std::span<const double> pi) {
  check_pi(p, pi);
  auto values = symmetric_eigenvalues(symmetrized(p, pi));
  std::sort(values.begin(), values.end(), std::greater<>());
  for (double& v : values) v = clamp_eigenvalue(v);
  return values;
}

SpectralProjection flip_symmetric_projection(const TransitionMatrix& p, std::span<const double> pi,
                                             std::span<const double> f) {
  check_pi(p, pi);
  const MrfModel& model = p.support->model();
  const auto* ising = std::get_if<IsingModel>(&model);
  if (ising == nullptr || ising->field() != 0.0) {
    throw InputError("flip_symmetric_projection: needs an Ising model with zero field");
  }
  const std::size_t s = pi.size();
  const std::size_t half = s / 2;
  if (s != (std::size_t{1} << p.support->num_sites()) || f.size() != s) {
    throw InputError("flip_symmetric_projection: size mismatch");
  }
  // Codes below half have x_0 = -1; the flip of code c is (s - 1) - c.
  for (std::size_t a = 0; a < half; ++a) {
    if (std::fabs(f[a] + f[s - 1 - a]) > 1e-12) throw InputError("flip_symmetric_projection: f is not odd");
  }
  const DenseMatrix full = symmetrized(p, pi);
  DenseMatrix even(half, half);
  DenseMatrix odd(half, half);
  for (std::size_t a = 0; a < half; ++a) {
    for (std::size_t b = 0; b < half; ++b) {
      even(a, b) = full(a, b) + full(a, s - 1 - b);
      odd(a, b) = full(a, b) - full(a, s - 1 - b);
    }
  }
  DenseMatrix vs(1, half);
  for (std::size_t a = 0; a < half; ++a) vs(0, a) = std::sqrt(2.0 * pi[a]) * f[a];
  const auto even_values = symmetric_eigenvalues(std::move(even));
  SymmetricProjection odd_proj = symmetric_eigen_project(std::move(odd), vs);

  std::vector<double> values(even_values);
  values.insert(values.end(), odd_proj.values.begin(), odd_proj.values.end());
  const auto order = descending_order(values);
  SpectralProjection out;
  out.eigenvalues.resize(s);
  out.coefficients = DenseMatrix(s, 1);
  for (std::size_t l = 0; l < s; ++l) {
    out.eigenvalues[l] = clamp_eigenvalue(values[order[l]]);
    if (order[l] >= half) out.coefficients(l, 0) = odd_proj.coefficients(order[l] - half, 0);
  }
  return out;
}

double inner_product_pi(std::span<const double> f, std::span<const double> g,
                        std::span<const double> pi) {
  if (f.size() != pi.size() || g.size() != pi.size()) {
    throw InputError("inner_product_pi: length mismatch");
  }
  return kernels::weighted_dot(pi, f, g);
}

std::vector<double> fourier_coefficients(std::span<const double> f, const Spectrum& spec) {
  std::vector<double> out(spec.size());
  for (std::size_t l = 0; l < spec.size(); ++l) out[l] = inner_product_pi(f, spec.vector(l), spec.pi);
  return out;
}

BlockStructure detect_blocks(std::span<const double> lambda, double gamma, std::size_t n_max,
                             double c) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("detect_blocks: gamma must lie in (0, 1)");
  if (c < 0.0) throw InputError("detect_blocks: c must be nonnegative");
  BlockStructure out;
  out.gamma = gamma;
  out.max_block = n_max;
  out.c = c;
  const double floor = std::pow(gamma, c);
  for (std::size_t j = 0; j + 1 < lambda.size(); ++j) {
    if (lambda[j] <= 0.0) break;
    const double ratio = lambda[j + 1] <= 0.0 ? 0.0 : lambda[j + 1] / lambda[j];
    if (ratio <= gamma) {
      if (lambda[j] < floor) break;
      out.cuts.push_back(j + 1);
    }
  }
  std::size_t begin = 0;
  for (std::size_t cut : out.cuts) {
    out.blocks.push_back({begin, cut});
    out.achieved_n = std::max(out.achieved_n, cut - begin);
    begin = cut;
  }
  out.remainder = {begin, lambda.size()};
  if (out.cuts.empty()) {
    out.reason = "no gap with ratio <= gamma above gamma^c";
    return out;
  }
  const double last = lambda[out.cuts.back() - 1];
  out.achieved_c = last >= 1.0 ? 0.0 : std::log(last) / std::log(gamma);
  if (out.achieved_n > n_max) {
    out.reason = "block of size " + std::to_string(out.achieved_n) + " exceeds N = " +
                 std::to_string(n_max);
    return out;
  }
  out.discrete = true;
  return out;
}

double smallest_singular_value(const DenseMatrix& a) {
  const bool tall = a.rows() >= a.cols();
  const std::size_t d = tall ? a.cols() : a.rows();
  if (d == 0) return 0.0;
  DenseMatrix gram(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double v = 0.0;
      if (tall) {
        for (std::size_t r = 0; r < a.rows(); ++r) v += a(r, i) * a(r, j);
      } else {
        v = kernels::dot(a.row(i), a.row(j));
      }
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  const auto values = symmetric_eigenvalues(std::move(gram));
  const double low = *std::min_element(values.begin(), values.end());
  return std::sqrt(std::max(low, 0.0));
}

namespace {

double binomial_saturating(std::size_t n, std::size_t k, double cap) {
  double v = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    v = v * static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (v > cap) return v;
  }
  return v;
}

DenseMatrix select_rows(const DenseMatrix& a, const std::vector<std::size_t>& rows) {
  DenseMatrix out(rows.size(), a.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(a.row(rows[r]).begin(), a.row(rows[r]).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

UsefulBasisReport useful_basis_alpha(const DenseMatrix& g_values, const Spectrum& spec,
                                     const BlockStructure& blocks) {
  constexpr double kExhaustiveLimit = 1e5;
  const std::size_t count = g_values.rows();
  if (g_values.cols() != spec.pi.size()) throw InputError("useful_basis_alpha: function length mismatch");
  for (double v : g_values.data()) {
    if (std::fabs(v) > 1.0 + 1e-12) throw InputError("useful_basis_alpha: basis function exceeds 1 in magnitude");
  }
  UsefulBasisReport report;
  for (std::size_t b = 0; b < blocks.blocks.size(); ++b) {
    const Block block = blocks.blocks[b];
    const std::size_t nj = block.size();
    if (count < nj) {
      throw InputError("useful_basis_alpha: block " + std::to_string(b + 1) + " (eigenvalues " +
                       std::to_string(block.begin + 1) + ".." + std::to_string(block.end) +
                       ") needs " + std::to_string(nj) + " functions but the family has " +
                       std::to_string(count));
    }
    DenseMatrix full(count, nj);
    for (std::size_t m = 0; m < count; ++m) {
      for (std::size_t l = 0; l < nj; ++l) {
        full(m, l) = inner_product_pi(g_values.row(m), spec.vector(block.begin + l), spec.pi);
      }
    }
    BlockBasis best;
    best.block = block;
    best.sigma_min = -1.0;
    if (binomial_saturating(count, nj, kExhaustiveLimit) <= kExhaustiveLimit) {
      std::vector<std::size_t> pick(nj);
      std::iota(pick.begin(), pick.end(), 0);
      for (;;) {
        const double sigma = smallest_singular_value(select_rows(full, pick));
        if (sigma > best.sigma_min) {
          best.sigma_min = sigma;
          best.chosen = pick;
        }
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(nj) - 1;
        while (i >= 0 && pick[i] == count - nj + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (std::size_t j = i + 1; j < nj; ++j) pick[j] = pick[j - 1] + 1;
      }
    } else {
      best.exhaustive = false;
      std::vector<char> taken(count, 0);
      for (std::size_t r = 0; r < nj; ++r) {
        double step_best = -1.0;
        std::size_t arg = 0;
        for (std::size_t m = 0; m < count; ++m) {
          if (taken[m]) continue;
          auto trial = best.chosen;
          trial.push_back(m);
          const double sigma = smallest_singular_value(select_rows(full, trial));
          if (sigma > step_best) {
            step_best = sigma;
            arg = m;
          }
        }
        taken[arg] = 1;
        best.chosen.push_back(arg);
        best.sigma_min = step_best;
      }
    }
    best.a = select_rows(full, best.chosen);
    best.alpha = best.sigma_min > 0.0 ? 1.0 / best.sigma_min : std::numeric_limits<double>::infinity();
    report.alpha = std::max(report.alpha, best.alpha);
    report.blocks.push_back(std::move(best));
  }
  return report;
}

UsefulBasisReport useful_basis_alpha(const BasisFamily& family, const Spectrum& spec,
                                     const BlockStructure& blocks) {
  return useful_basis_alpha(tabulate(family, *spec.support), spec, blocks);
}

std::vector<double> exact_Pt_g(const TransitionMatrix& p, std::span<const double> g, std::size_t t) {
  const std::size_t s = p.size();
  if (g.size() != s) throw InputError("exact_Pt_g: function length mismatch");
  std::vector<double> cur(g.begin(), g.end());
  std::vector<double> next(s);
  for (std::size_t step = 0; step < t; ++step) {
    for (std::size_t i = 0; i < s; ++i) next[i] = kernels::dot(p.p.row(i), cur);
    cur.swap(next);
  }
  return cur;
}

EigenReconstruction reconstruct_eigenvector(const Spectrum& spec, const TransitionMatrix& p,
                                            const DenseMatrix& g_values, std::size_t ell,
                                            std::size_t tau_max, std::size_t dictionary_cap) {
  const std::size_t s = spec.pi.size();
  const std::size_t m_count = g_values.rows();
  if (ell >= spec.size()) throw InputError("reconstruct_eigenvector: eigenvector index out of range");
  if (g_values.cols() != s || p.size() != s) throw InputError("reconstruct_eigenvector: size mismatch");
  const std::size_t cols = (tau_max + 1) * m_count;
  if (cols > dictionary_cap) {
    throw SizeCapError("dictionary of " + std::to_string(cols) + " functions exceeds the cap of " +
                       std::to_string(dictionary_cap));
  }
  std::vector<double> root(s);
  for (std::size_t i = 0; i < s; ++i) root[i] = std::sqrt(spec.pi[i]);

  // Row (t, m) = sqrt(pi) * P^t g_m.
  DenseMatrix dict(cols, s);
  for (std::size_t m = 0; m < m_count; ++m) {
    std::vector<double> cur(g_values.row(m).begin(), g_values.row(m).end());
    for (std::size_t t = 0; t <= tau_max; ++t) {
      auto row = dict.row(t * m_count + m);
      for (std::size_t i = 0; i < s; ++i) row[i] = root[i] * cur[i];
      if (t < tau_max) cur = exact_Pt_g(p, cur, 1);
    }
  }
  std::vector<double> target(s);
  const auto nu = spec.vector(ell);
  for (std::size_t i = 0; i < s; ++i) target[i] = root[i] * nu[i];

  std::vector<double> beta(cols, 0.0);
  if (cols <= s) {
    DenseMatrix gram(cols, cols);
    std::vector<double> rhs(cols);
    for (std::size_t a = 0; a < cols; ++a) {
      rhs[a] = kernels::dot(dict.row(a), target);
      for (std::size_t b = a; b < cols; ++b) {
        gram(a, b) = gram(b, a) = kernels::dot(dict.row(a), dict.row(b));
      }
    }
    beta = damped_solve(std::move(gram), rhs);
  } else {
    // Push-through form: beta = E^T (E E^T + damping I)^{-1} target.
    DenseMatrix kernel(s, s);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto row = dict.row(c);
      for (std::size_t i = 0; i < s; ++i) {
        if (row[i] != 0.0) kernels::axpy(row[i], row, kernel.row(i));
      }
    }
    const auto z = damped_solve(std::move(kernel), target);
    for (std::size_t c = 0; c < cols; ++c) beta[c] = kernels::dot(dict.row(c), z);
  }

  std::vector<double> residual = target;
  for (std::size_t c = 0; c < cols; ++c) {
    if (beta[c] != 0.0) kernels::axpy(-beta[c], dict.row(c), residual);
  }
  EigenReconstruction out;
  out.ell = ell;
  out.tau_max = tau_max;
  out.coefficients = DenseMatrix(tau_max + 1, m_count);
  std::copy(beta.begin(), beta.end(), out.coefficients.data().begin());
  out.residual = std::sqrt(kernels::dot(residual, residual));
  for (double b : beta) out.coefficient_mass += std::fabs(b);
  return out;
}

Theorem1Bounds theorem1_bounds(double n_max, double k, double gamma, double c, double alpha,
                               double epsilon) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("theorem1_bounds: gamma must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw InputError("theorem1_bounds: epsilon must be positive");
  if (!(n_max >= 1.0 && k >= 1.0 && alpha > 0.0 && c >= 0.0)) {
    throw InputError("theorem1_bounds: need N >= 1, k >= 1, alpha > 0, c >= 0");
  }
  Theorem1Bounds out;
  out.log_b = std::pow(1.0 + c, k + 1.0) * std::log(2.0 * alpha * n_max * k) +
              std::pow(1.0 + c, k) * std::log(1.0 / epsilon);
  out.b = std::exp(out.log_b);
  out.tau_max_real = k * std::pow(1.0 + c, k - 1.0) *
                     (std::log(n_max) + std::log(k) + std::log(alpha) + std::log(1.0 / epsilon)) /
                     std::log(1.0 / gamma);
  const double ceiling = std::ceil(std::max(0.0, out.tau_max_real));
  out.tau_max = ceiling >= static_cast<double>(std::numeric_limits<std::size_t>::max())
                    ? std::numeric_limits<std::size_t>::max()
                    : static_cast<std::size_t>(ceiling);
  return out;
}

}  // namespace mrflearn
