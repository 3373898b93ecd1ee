#include "mrflearn/eigensolver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mrflearn/errors.hpp"
#include "mrflearn/kernels.hpp"

namespace mrflearn {

TridiagonalForm tridiagonalize(DenseMatrix a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InputError("tridiagonalize: matrix is not square");
  const auto& k = kernels::active();

  TridiagonalForm form;
  form.diag.assign(n, 0.0);
  form.offdiag.assign(n, 0.0);
  form.tau.assign(n, 0.0);
  std::vector<double> p(n);
  std::vector<double> w(n);

  for (std::size_t s = 0; s + 2 < n; ++s) {
    const std::size_t m = n - s - 1;
    double* x = &a(s, s + 1);
    const double alpha = x[0];
    const double sigma = k.dot(x + 1, x + 1, m - 1);
    form.diag[s] = a(s, s);
    if (sigma == 0.0) {
      form.offdiag[s] = alpha;
      x[0] = 1.0;
      continue;
    }
    const double mu = std::sqrt(alpha * alpha + sigma);
    const double beta = alpha <= 0.0 ? mu : -mu;
    const double tau = (beta - alpha) / beta;
    k.scale(1.0 / (alpha - beta), x + 1, m - 1);
    x[0] = 1.0;
    form.offdiag[s] = beta;
    form.tau[s] = tau;

    for (std::size_t r = 0; r < m; ++r) p[r] = tau * k.dot(&a(s + 1 + r, s + 1), x, m);
    const double half = 0.5 * tau * k.dot(p.data(), x, m);
    for (std::size_t r = 0; r < m; ++r) w[r] = p[r] - half * x[r];
    for (std::size_t r = 0; r < m; ++r) {
      k.axpy2(-x[r], w.data(), -w[r], x, &a(s + 1 + r, s + 1), m);
    }
  }
  if (n >= 2) {
    form.diag[n - 2] = a(n - 2, n - 2);
    form.offdiag[n - 2] = a(n - 2, n - 1);
  }
  if (n >= 1) form.diag[n - 1] = a(n - 1, n - 1);
  form.reflectors = std::move(a);
  return form;
}

void apply_q_transpose(const TridiagonalForm& form, std::span<double> v) {
  const std::size_t n = form.diag.size();
  const auto& k = kernels::active();
  for (std::size_t s = 0; s + 2 < n; ++s) {
    const double tau = form.tau[s];
    if (tau == 0.0) continue;
    const std::size_t m = n - s - 1;
    const double* h = form.reflectors.row(s).data() + s + 1;
    const double coeff = tau * k.dot(h, v.data() + s + 1, m);
    k.axpy(-coeff, h, v.data() + s + 1, m);
  }
}

DenseMatrix q_transpose(const TridiagonalForm& form) {
  const std::size_t n = form.diag.size();
  const auto& k = kernels::active();
  DenseMatrix q = DenseMatrix::identity(n);
  std::vector<double> y(n);
  for (std::size_t s = n >= 3 ? n - 3 + 1 : 0; s-- > 0;) {
    const double tau = form.tau[s];
    if (tau == 0.0) continue;
    const std::size_t m = n - s - 1;
    const double* h = form.reflectors.row(s).data() + s + 1;
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      if (h[r] != 0.0) k.axpy(h[r], &q(s + 1 + r, s + 1), y.data(), m);
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (h[r] != 0.0) k.axpy(-tau * h[r], y.data(), &q(s + 1 + r, s + 1), m);
    }
  }
  return q.transposed();
}

void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, DenseMatrix* rows) {
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  if (n == 0) return;
  e.resize(d.size());
  e[n - 1] = 0.0;
  const auto& k = kernels::active();
  const std::size_t width = rows != nullptr ? rows->cols() : 0;
  // Absolute floor: off-diagonals below eps ||T|| are rounding noise. Without it
  // a cluster of tiny eigenvalues next to large ones never deflates.
  double norm = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    norm = std::max(norm, std::fabs(d[i]) + std::fabs(e[i]) + (i > 0 ? std::fabs(e[i - 1]) : 0.0));
  }
  const double floor = std::numeric_limits<double>::epsilon() * norm;

  for (std::ptrdiff_t l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      std::ptrdiff_t m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) + dd == dd || std::fabs(e[m]) <= floor) break;
      }
      if (m == l) break;
      if (++iter > 64) {
        throw NumericalError("implicit QL: no convergence for eigenvalue " + std::to_string(l));
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool deflated = false;
      for (std::ptrdiff_t i = m - 1; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (width != 0) k.rotate(c, s, &(*rows)(i, 0), &(*rows)(i + 1, 0), width);
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

SymmetricEigen symmetric_eigen(DenseMatrix a) {
  TridiagonalForm form = tridiagonalize(std::move(a));
  DenseMatrix rows = q_transpose(form);
  tridiagonal_ql(form.diag, form.offdiag, &rows);
  return {std::move(form.diag), std::move(rows)};
}

std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
  TridiagonalForm form = tridiagonalize(std::move(a));
  tridiagonal_ql(form.diag, form.offdiag, nullptr);
  return std::move(form.diag);
}

SymmetricProjection symmetric_eigen_project(DenseMatrix a, const DenseMatrix& vs) {
  const std::size_t n = a.rows();
  if (vs.cols() != n) throw InputError("symmetric_eigen_project: vector length mismatch");
  TridiagonalForm form = tridiagonalize(std::move(a));
  DenseMatrix coeff(n, vs.rows());
  std::vector<double> v(n);
  for (std::size_t j = 0; j < vs.rows(); ++j) {
    std::copy(vs.row(j).begin(), vs.row(j).end(), v.begin());
    apply_q_transpose(form, v);
    for (std::size_t i = 0; i < n; ++i) coeff(i, j) = v[i];
  }
  tridiagonal_ql(form.diag, form.offdiag, &coeff);
  return {std::move(form.diag), std::move(coeff)};
}

std::vector<double> solve_spd(DenseMatrix a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw InputError("solve_spd: dimension mismatch");
  const auto& k = kernels::active();
  // Lower factor overwrites the lower triangle, row by row.
  for (std::size_t i = 0; i < n; ++i) {
    double* ri = a.row(i).data();
    for (std::size_t j = 0; j <= i; ++j) {
      const double* rj = a.row(j).data();
      const double v = ri[j] - k.dot(ri, rj, j);
      if (i == j) {
        if (!(v > 0.0)) throw NumericalError("solve_spd: matrix is not positive definite");
        ri[i] = std::sqrt(v);
      } else {
        ri[j] = v / rj[j];
      }
    }
  }
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) x[i] = (x[i] - k.dot(a.row(i).data(), x.data(), i)) / a(i, i);
  for (std::size_t i = n; i-- > 0;) {
    double v = x[i];
    for (std::size_t j = i + 1; j < n; ++j) v -= a(j, i) * x[j];
    x[i] = v / a(i, i);
  }
  return x;
}

}  // namespace mrflearn
