// Independent reference implementations used to check the library. Nothing
// here calls into the code under test except for model accessors.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "mrflearn/matrix.hpp"
#include "mrflearn/models.hpp"

namespace oracle {

using mrflearn::Configuration;
using mrflearn::DenseMatrix;

// Every configuration over the alphabet, lexicographic with -1 < +1 for spins.
inline std::vector<Configuration> all_configurations(std::size_t n, std::size_t alphabet, bool spins) {
  std::vector<Configuration> out;
  std::vector<int> digits(n, 0);
  for (;;) {
    Configuration c;
    for (int d : digits) c.values.push_back(static_cast<std::int8_t>(spins ? 2 * d - 1 : d));
    out.push_back(c);
    std::size_t i = n;
    while (i > 0 && digits[i - 1] == static_cast<int>(alphabet) - 1) digits[--i] = 0;
    if (i == 0) break;
    ++digits[i - 1];
  }
  return out;
}

// Energy from the edge list, written out independently of the library.
inline double energy(const mrflearn::IsingModel& m, const Configuration& s) {
  double h = 0.0;
  const auto edges = m.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) h -= m.beta()[e] * s[edges[e].u] * s[edges[e].v];
  for (std::size_t i = 0; i < s.size(); ++i) h -= m.field() * s[i];
  return h;
}

inline bool proper(const mrflearn::ColoringModel& m, const Configuration& c) {
  for (const auto& e : m.graph().edges())
    if (c[e.u] == c[e.v]) return false;
  return true;
}

struct Chain {
  std::vector<Configuration> states;
  std::vector<double> pi;
  DenseMatrix p;
};

// Lazy heat-bath chain built from full energy differences.
inline Chain ising_chain(const mrflearn::IsingModel& m) {
  Chain c;
  const std::size_t n = m.num_sites();
  c.states = all_configurations(n, 2, true);
  const std::size_t s = c.states.size();
  std::map<std::vector<std::int8_t>, std::size_t> index;
  for (std::size_t k = 0; k < s; ++k) index[c.states[k].values] = k;
  c.pi.resize(s);
  double z = 0.0;
  for (std::size_t k = 0; k < s; ++k) z += c.pi[k] = std::exp(-energy(m, c.states[k]));
  for (double& v : c.pi) v /= z;
  c.p = DenseMatrix(s, s);
  for (std::size_t k = 0; k < s; ++k) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Configuration y = c.states[k];
      y[i] = static_cast<std::int8_t>(-y[i]);
      const double wx = std::exp(-energy(m, c.states[k]));
      const double wy = std::exp(-energy(m, y));
      const double q = 0.5 / static_cast<double>(n) * wy / (wx + wy);
      c.p(k, index[y.values]) += q;
      moved += q;
    }
    c.p(k, k) += 1.0 - moved;
  }
  return c;
}

inline Chain coloring_chain(const mrflearn::ColoringModel& m) {
  Chain c;
  const std::size_t n = m.num_sites();
  for (auto& x : all_configurations(n, static_cast<std::size_t>(m.q()), false))
    if (proper(m, x)) c.states.push_back(x);
  const std::size_t s = c.states.size();
  std::map<std::vector<std::int8_t>, std::size_t> index;
  for (std::size_t k = 0; k < s; ++k) index[c.states[k].values] = k;
  c.pi.assign(s, 1.0 / static_cast<double>(s));
  c.p = DenseMatrix(s, s);
  for (std::size_t k = 0; k < s; ++k) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> allowed;
      for (int col = 0; col < m.q(); ++col) {
        Configuration y = c.states[k];
        y[i] = static_cast<std::int8_t>(col);
        if (proper(m, y)) allowed.push_back(col);
      }
      for (int col : allowed) {
        if (col == c.states[k][i]) continue;
        Configuration y = c.states[k];
        y[i] = static_cast<std::int8_t>(col);
        const double q = 0.5 / static_cast<double>(n) / static_cast<double>(allowed.size());
        c.p(k, index[y.values]) += q;
        moved += q;
      }
    }
    c.p(k, k) += 1.0 - moved;
  }
  return c;
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += v * b(k, j);
    }
  return c;
}

inline DenseMatrix power(const DenseMatrix& p, std::size_t t) {
  DenseMatrix r = DenseMatrix::identity(p.rows());
  for (std::size_t s = 0; s < t; ++s) r = multiply(r, p);
  return r;
}

inline double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// Cyclic Jacobi rotations; eigenvalues descending.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a, double tol = 1e-14) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// D^{1/2} P D^{-1/2}
inline DenseMatrix symmetrize(const DenseMatrix& p, const std::vector<double>& pi) {
  DenseMatrix s(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) s(i, j) = std::sqrt(pi[i] / pi[j]) * p(i, j);
  return s;
}

// Solves a d x d system by Gaussian elimination with partial pivoting.
// Returns false when singular.
inline bool solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t d = b.size();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-11) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < d; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(d, 0.0);
  for (std::size_t c = d; c-- > 0;) {
    double v = b[c];
    for (std::size_t k = c + 1; k < d; ++k) v -= a[c][k] * x[k];
    x[c] = v / a[c][c];
  }
  return true;
}

inline double l1_value(const DenseMatrix& phi, const std::vector<double>& y, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    double r = -y[i];
    for (std::size_t k = 0; k < w.size(); ++k) r += phi(i, k) * w[k];
    s += std::abs(r);
  }
  return s;
}

// min sum_i |phi_i w - y_i| s.t. |w|_1 <= W by vertex enumeration. The optimum
// is attained where d independent hyperplanes meet, taken from the residual
// planes, the coordinate planes and at most one facet of the L1 ball (a ball
// vertex is a facet plus coordinate planes).
inline double l1_vertex_optimum(const DenseMatrix& phi, const std::vector<double>& y, double budget) {
  const std::size_t d = phi.cols(), s = phi.rows();
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < s; ++i) {
    planes.emplace_back(phi.row(i).begin(), phi.row(i).end());
    rhs.push_back(y[i]);
  }
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> e(d, 0.0);
    e[k] = 1.0;
    planes.push_back(e);
    rhs.push_back(0.0);
  }
  const std::size_t base = planes.size();
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& w) {
    double mass = 0.0;
    for (double v : w) mass += std::abs(v);
    if (mass <= budget * (1.0 + 1e-12) + 1e-12) best = std::min(best, l1_value(phi, y, w));
  };
  // facet index -1: none; otherwise a sign pattern.
  for (long facet = -1; facet < (1L << d); ++facet) {
    const std::size_t need = facet < 0 ? d : d - 1;
    std::vector<std::size_t> pick(need);
    std::iota(pick.begin(), pick.end(), 0);
    if (need > base) continue;
    for (;;) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (std::size_t r : pick) {
        a.push_back(planes[r]);
        b.push_back(rhs[r]);
      }
      if (facet >= 0) {
        std::vector<double> sgn(d);
        for (std::size_t k = 0; k < d; ++k) sgn[k] = (facet >> k) & 1 ? 1.0 : -1.0;
        a.push_back(sgn);
        b.push_back(budget);
      }
      std::vector<double> w;
      if (a.empty()) {
        consider(std::vector<double>(d, 0.0));
      } else if (solve(a, b, w)) {
        consider(w);
      }
      // next combination
      std::size_t i = need;
      while (i > 0 && pick[i - 1] == base - need + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return best;
}

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace oracle
