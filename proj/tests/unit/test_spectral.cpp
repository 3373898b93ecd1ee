#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mrflearn/basis.hpp"
#include "mrflearn/errors.hpp"
#include "mrflearn/noise.hpp"
#include "mrflearn/spectral.hpp"
#include "mrflearn/support.hpp"
#include "oracles.hpp"

using namespace mrflearn;

namespace {

struct Exact {
  std::shared_ptr<const SupportIndex> support;
  TransitionMatrix p;
  std::vector<double> pi;
  Spectrum spec;
};

Exact exact(const MrfModel& m) {
  Exact e;
  e.support = enumerate_support(m);
  e.p = exact_transition_matrix(e.support);
  e.pi = stationary_exact(*e.support);
  e.spec = eigendecompose(e.p, e.pi);
  return e;
}

std::vector<double> analytic_free_spectrum(std::size_t n) {
  std::vector<double> ev;
  for (std::size_t j = 0; j <= n; ++j)
    for (double c = oracle::binomial(n, j); c > 0.5; c -= 1.0)
      ev.push_back(1.0 - static_cast<double>(j) / static_cast<double>(n));
  return ev;
}

std::vector<double> row_of(const DenseMatrix& m, std::size_t r) { return {m.row(r).begin(), m.row(r).end()}; }

}  // namespace

TEST(Support, Sizes) {
  EXPECT_EQ(enumerate_support(IsingModel::uniform(make_path(3), 0.2))->size(), 8u);
  EXPECT_EQ(enumerate_support(ColoringModel(make_complete(3), 3))->size(), 6u);
  EXPECT_THROW(enumerate_support(IsingModel::uniform(make_cycle(22), 0.1)), SizeCapError);
  EXPECT_THROW(enumerate_support(IsingModel::uniform(make_cycle(6), 0.1), 32), SizeCapError);
}

TEST(Support, LexicographicAndBijective) {
  const auto s = enumerate_support(ColoringModel(make_cycle(4), 3));
  for (std::size_t k = 0; k < s->size(); ++k) {
    EXPECT_EQ(s->index_of(s->state(k)), k);
    if (k > 0) EXPECT_LT(s->state(k - 1).values, s->state(k).values);
  }
  EXPECT_EQ(s->index_of({0, 0, 1, 2}), SupportIndex::npos);
}

TEST(TransitionMatrix, FreeTwoSpinChainByHand) {
  // The lazy rule halves every move: 1/2 * 1/n * 1/2 = 1/8 per neighbor.
  const auto t = exact_transition_matrix(IsingModel::uniform(make_path(2), 0.0));
  const auto w = hypercube_walk_matrix(2);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      const int d = std::popcount(a ^ b);
      EXPECT_DOUBLE_EQ(t.p(a, b), d == 0 ? 0.75 : d == 1 ? 0.125 : 0.0);
      EXPECT_DOUBLE_EQ(w.p(a, b), d == 0 ? 0.5 : d == 1 ? 0.25 : 0.0);
    }
}

TEST(TransitionMatrix, FreeGlauberIsLazyHypercubeWalk) {
  const auto t = exact_transition_matrix(IsingModel::uniform(make_cycle(5), 0.0));
  const auto w = hypercube_walk_matrix(5);
  for (std::size_t a = 0; a < 32; ++a)
    for (std::size_t b = 0; b < 32; ++b) EXPECT_NEAR(t.p(a, b), 0.5 * ((a == b) + w.p(a, b)), 1e-15);
  EXPECT_THROW(hypercube_walk_matrix(0), InputError);
}

TEST(TransitionMatrix, MatchesIndependentConstruction) {
  const IsingModel ising = IsingModel::uniform(make_cycle(6), 0.2, 0.1);
  const auto ref = oracle::ising_chain(ising);
  const auto t = exact_transition_matrix(ising);
  for (std::size_t a = 0; a < ref.states.size(); ++a)
    for (std::size_t b = 0; b < ref.states.size(); ++b) EXPECT_NEAR(t.p(a, b), ref.p(a, b), 1e-15);
  const ColoringModel col(make_grid(2, 3), 4);
  const auto cref = oracle::coloring_chain(col);
  const auto ct = exact_transition_matrix(col);
  ASSERT_EQ(ct.size(), cref.states.size());
  for (std::size_t a = 0; a < cref.states.size(); ++a)
    for (std::size_t b = 0; b < cref.states.size(); ++b) EXPECT_NEAR(ct.p(a, b), cref.p(a, b), 1e-15);
}

TEST(TransitionMatrix, RowsSumToOneAndSparseAgrees) {
  const auto support = enumerate_support(IsingModel::uniform(make_grid(2, 3), 0.5));
  const auto t = exact_transition_matrix(support);
  const auto sp = sparse_transition_matrix(support);
  std::vector<double> x(t.size()), y(t.size());
  RngStream rng(1);
  for (double& v : x) v = rng.uniform();
  sp.apply(x, y);
  for (std::size_t a = 0; a < t.size(); ++a) {
    double sum = 0.0, px = 0.0;
    for (std::size_t b = 0; b < t.size(); ++b) {
      sum += t.p(a, b);
      px += t.p(a, b) * x[b];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GE(t.p(a, a), 0.5);
    EXPECT_NEAR(y[a], px, 1e-13);
  }
}

TEST(Stationary, ExamplesAndFixedPoint) {
  const auto free = enumerate_support(IsingModel::uniform(make_cycle(5), 0.0));
  for (double v : stationary_exact(*free)) EXPECT_NEAR(v, 1.0 / 32, 1e-15);
  const auto col = enumerate_support(ColoringModel(make_cycle(5), 3));
  for (double v : stationary_exact(*col)) EXPECT_NEAR(v, 1.0 / static_cast<double>(col->size()), 1e-15);
  const IsingModel m = IsingModel::uniform(make_cycle(6), 0.2);
  const auto e = exact(m);
  const auto ref = oracle::ising_chain(m);
  for (std::size_t b = 0; b < e.pi.size(); ++b) {
    EXPECT_NEAR(e.pi[b], ref.pi[b], 1e-15);
    double s = 0.0;
    for (std::size_t a = 0; a < e.pi.size(); ++a) s += e.pi[a] * e.p.p(a, b);
    EXPECT_NEAR(s, e.pi[b], 1e-12);
  }
  EXPECT_LE(detailed_balance_violation(e.p, e.pi), 1e-12);
}

TEST(Eigendecompose, HypercubeWalkOnThreeSpins) {
  const auto w = hypercube_walk_matrix(3);
  const std::vector<double> uniform(8, 1.0 / 8);
  const auto spec = eigendecompose(w, uniform);
  const std::vector<double> expect{1, 2.0 / 3, 2.0 / 3, 2.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0};
  for (std::size_t l = 0; l < 8; ++l) EXPECT_NEAR(spec.eigenvalues[l], expect[l], 1e-12);
  // Each single-coordinate parity lies in the span of nu_2..nu_4.
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> chi(8);
    for (std::size_t k = 0; k < 8; ++k) chi[k] = w.support->values(k)[i];
    const auto fhat = fourier_coefficients(chi, spec);
    EXPECT_NEAR(fhat[1] * fhat[1] + fhat[2] * fhat[2] + fhat[3] * fhat[3], 1.0, 1e-12);
  }
}

TEST(Eigendecompose, AnalyticSpectraForFreeChains) {
  for (std::size_t n = 3; n <= 8; ++n) {
    const auto w = hypercube_walk_matrix(n);
    const std::vector<double> uniform(w.size(), 1.0 / static_cast<double>(w.size()));
    const auto walk = eigendecompose(w, uniform).eigenvalues;
    const auto glauber = exact(IsingModel::uniform(make_cycle(n), 0.0)).spec.eigenvalues;
    const auto expect = analytic_free_spectrum(n);
    ASSERT_EQ(walk.size(), expect.size());
    for (std::size_t l = 0; l < expect.size(); ++l) {
      EXPECT_NEAR(walk[l], expect[l], 1e-9);
      EXPECT_NEAR(glauber[l], 0.5 * (1.0 + expect[l]), 1e-9);
    }
  }
}

TEST(Eigendecompose, InvariantsOnInteractingCycle) {
  const auto e = exact(IsingModel::uniform(make_cycle(8), 0.1));
  const std::size_t s = e.spec.size();
  EXPECT_NEAR(e.spec.eigenvalues[0], 1.0, 1e-12);
  for (std::size_t k = 0; k < s; ++k) EXPECT_NEAR(std::abs(e.spec.vector(0)[k]), 1.0, 1e-9);
  for (std::size_t l = 0; l < s; ++l) {
    EXPECT_GE(e.spec.eigenvalues[l], -1e-10);
    if (l > 0) EXPECT_LE(e.spec.eigenvalues[l], e.spec.eigenvalues[l - 1]);
    const auto v = e.spec.vector(l);
    double top = 0.0, peak = 0.0;
    for (double x : v) {
      top = std::max(top, x);
      peak = std::max(peak, std::abs(x));
    }
    EXPECT_GE(top, peak - 1e-9);
    for (std::size_t a = 0; a < s; ++a) {
      double pv = 0.0;
      for (std::size_t b = 0; b < s; ++b) pv += e.p.p(a, b) * v[b];
      ASSERT_NEAR(pv, e.spec.eigenvalues[l] * v[a], 1e-8);
    }
    for (std::size_t m = l; m < s; m += 7) {
      EXPECT_NEAR(inner_product_pi(v, e.spec.vector(m), e.pi), l == m ? 1.0 : 0.0, 1e-9);
    }
  }
}

TEST(Eigendecompose, EigenvaluesMatchJacobiOracle) {
  const IsingModel m(make_path(5), {0.3, -0.7, 1.1, 0.2}, 0.25);
  const auto ref = oracle::ising_chain(m);
  const auto jac = oracle::jacobi_eigenvalues(oracle::symmetrize(ref.p, ref.pi));
  const auto e = exact(m);
  for (std::size_t l = 0; l < jac.size(); ++l) EXPECT_NEAR(e.spec.eigenvalues[l], jac[l], 1e-11);
  const ColoringModel col(make_cycle(5), 3);
  const auto cref = oracle::coloring_chain(col);
  const auto cjac = oracle::jacobi_eigenvalues(oracle::symmetrize(cref.p, cref.pi));
  const auto ce = exact(col);
  for (std::size_t l = 0; l < cjac.size(); ++l) EXPECT_NEAR(ce.spec.eigenvalues[l], cjac[l], 1e-11);
}

TEST(Eigendecompose, SpectralRoundTripReproducesP) {
  const auto e = exact(IsingModel::uniform(make_cycle(8), 0.3, 0.1));
  const std::size_t s = e.spec.size();
  for (std::size_t a = 0; a < s; a += 5)
    for (std::size_t b = 0; b < s; ++b) {
      double v = 0.0;
      for (std::size_t l = 0; l < s; ++l) v += e.spec.eigenvalues[l] * e.spec.vector(l)[a] * e.spec.vector(l)[b];
      ASSERT_NEAR(v * e.pi[b], e.p.p(a, b), 1e-7);
    }
}

TEST(Eigendecompose, RejectsBrokenDetailedBalance) {
  auto e = exact(IsingModel::uniform(make_cycle(4), 0.5));
  e.p.p(0, 1) += 1e-3;
  e.p.p(0, 0) -= 1e-3;
  EXPECT_THROW(eigendecompose(e.p, e.pi), NumericalError);
}

TEST(Fourier, BasicIdentities) {
  const auto e = exact(IsingModel::uniform(make_cycle(6), 0.2));
  const std::vector<double> one(e.pi.size(), 1.0);
  EXPECT_NEAR(inner_product_pi(one, one, e.pi), 1.0, 1e-15);
  const auto c1 = fourier_coefficients(one, e.spec);
  EXPECT_NEAR(std::abs(c1[0]), 1.0, 1e-12);
  for (std::size_t l = 1; l < c1.size(); ++l) EXPECT_NEAR(c1[l], 0.0, 1e-9);
  const auto v5 = row_of(e.spec.eigenvectors, 5);
  const auto c5 = fourier_coefficients(v5, e.spec);
  for (std::size_t l = 0; l < c5.size(); ++l) EXPECT_NEAR(c5[l], l == 5 ? 1.0 : 0.0, 1e-9);
  EXPECT_NEAR(inner_product_pi(row_of(e.spec.eigenvectors, 1), row_of(e.spec.eigenvectors, 2), e.pi), 0.0, 1e-9);
  // <chi_1, chi_2> equals the pair correlation by direct summation over the oracle.
  const auto ref = oracle::ising_chain(IsingModel::uniform(make_cycle(6), 0.2));
  double direct = 0.0;
  for (std::size_t k = 0; k < ref.states.size(); ++k) direct += ref.pi[k] * ref.states[k][0] * ref.states[k][1];
  std::vector<double> x0(e.pi.size()), x1(e.pi.size());
  for (std::size_t k = 0; k < e.pi.size(); ++k) {
    x0[k] = e.support->values(k)[0];
    x1[k] = e.support->values(k)[1];
  }
  EXPECT_NEAR(inner_product_pi(x0, x1, e.pi), direct, 1e-14);
}

TEST(Fourier, ParsevalForRandomBooleanFunctions) {
  const auto e = exact(IsingModel::uniform(make_cycle(8), 0.1));
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(e.pi.size());
    for (double& v : f) v = rng.coin() ? 1.0 : -1.0;
    double sum = 0.0;
    for (double c : fourier_coefficients(f, e.spec)) sum += c * c;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Fourier, FlipSymmetricProjectionMatchesFullProjection) {
  const auto support = enumerate_support(IsingModel::uniform(make_complete(7), 0.15));
  const auto p = exact_transition_matrix(support);
  const auto pi = stationary_exact(*support);
  DenseMatrix f(1, support->size());
  for (std::size_t k = 0; k < support->size(); ++k) f(0, k) = majority(support->values(k));
  const auto full = spectral_projection(p, pi, f);
  const auto half = flip_symmetric_projection(p, pi, f.row(0));
  // Compare the basis-invariant tail masses sum_{l >= M} fhat^2.
  auto tail = [](const SpectralProjection& sp, std::size_t from) {
    std::vector<std::pair<double, double>> rows;
    for (std::size_t l = 0; l < sp.eigenvalues.size(); ++l)
      rows.emplace_back(sp.eigenvalues[l], sp.coefficients(l, 0) * sp.coefficients(l, 0));
    double t = 0.0;
    for (std::size_t l = from; l < rows.size(); ++l) t += rows[l].second;
    return t;
  };
  for (std::size_t l = 0; l < full.eigenvalues.size(); ++l) EXPECT_NEAR(full.eigenvalues[l], half.eigenvalues[l], 1e-10);
  for (std::size_t from : {1, 8, 29, 64, 100}) EXPECT_NEAR(tail(full, from), tail(half, from), 1e-9);
  DenseMatrix even(1, support->size(), 1.0);
  EXPECT_THROW(flip_symmetric_projection(p, pi, even.row(0)), InputError);
}

TEST(Blocks, FreeChainLevels) {
  const auto ev = analytic_free_spectrum(4);
  for (auto [gamma, c] : {std::pair{0.8, 10.0}, std::pair{0.999, 2000.0}}) {
    const auto b = detect_blocks(ev, gamma, 6, c);
    ASSERT_EQ(b.cuts, (std::vector<std::size_t>{1, 5, 11, 15}));
    ASSERT_EQ(b.blocks.size(), 4u);
    EXPECT_EQ(b.blocks[0].size(), 1u);
    EXPECT_EQ(b.blocks[1].size(), 4u);
    EXPECT_EQ(b.blocks[2].size(), 6u);
    EXPECT_EQ(b.blocks[3].size(), 4u);
    EXPECT_TRUE(b.discrete);
    // Definition re-check.
    for (std::size_t cut : b.cuts) {
      const double r = ev[cut] <= 0 ? 0.0 : ev[cut] / ev[cut - 1];
      EXPECT_LE(r, gamma);
    }
    EXPECT_GE(ev[b.cuts.back() - 1], std::pow(gamma, c));
  }
}

TEST(Blocks, FlatSpectrumAndOversizedBlocks) {
  const std::vector<double> flat(6, 0.7);
  const auto b = detect_blocks(flat, 0.5, 10, 1.0);
  EXPECT_TRUE(b.cuts.empty());
  EXPECT_FALSE(b.discrete);
  EXPECT_EQ(b.remainder.size(), 6u);
  const auto big = detect_blocks(analytic_free_spectrum(4), 0.8, 3, 10.0);
  EXPECT_FALSE(big.discrete);
  EXPECT_FALSE(big.reason.empty());
  EXPECT_THROW(detect_blocks(flat, 1.0, 3, 1.0), InputError);
}

TEST(Blocks, FloorTruncatesCuts) {
  // gamma^c = 0.8^2 = 0.64 keeps only the cuts whose last eigenvalue is >= 0.64.
  const auto b = detect_blocks(analytic_free_spectrum(4), 0.8, 6, 2.0);
  EXPECT_EQ(b.cuts, (std::vector<std::size_t>{1, 5}));
}

TEST(UsefulBasis, ParitiesOnFreeChainGiveAlphaOne) {
  const auto e = exact(IsingModel::uniform(make_cycle(4), 0.0));
  const auto blocks = detect_blocks(e.spec.eigenvalues, 0.9, 6, 10.0);
  const auto report = useful_basis_alpha(parity_family(4, 4), e.spec, blocks);
  EXPECT_NEAR(report.alpha, 1.0, 1e-9);
  for (const auto& bb : report.blocks) EXPECT_GE(bb.sigma_min * report.alpha, 1.0 - 1e-9);
}

TEST(UsefulBasis, ScaledEigenvectorGivesAlphaTwo) {
  const auto e = exact(IsingModel::uniform(make_cycle(4), 0.3));
  BlockStructure first;
  first.blocks = {Block{0, 1}};
  first.cuts = {1};
  DenseMatrix g(1, e.pi.size());
  for (std::size_t k = 0; k < e.pi.size(); ++k) g(0, k) = 0.5 * e.spec.vector(0)[k];
  EXPECT_NEAR(useful_basis_alpha(g, e.spec, first).alpha, 2.0, 1e-9);
}

TEST(UsefulBasis, ConjunctionsCrossCheckedWithJacobi) {
  const auto e = exact(IsingModel::uniform(make_cycle(4), 0.0));
  const auto blocks = detect_blocks(e.spec.eigenvalues, 0.9, 6, 10.0);
  BlockStructure top = blocks;
  top.blocks.resize(3);
  top.cuts.resize(3);
  const auto report = useful_basis_alpha(conjunction_family(4, 2), e.spec, top);
  ASSERT_TRUE(std::isfinite(report.alpha));
  for (const auto& bb : report.blocks) {
    const DenseMatrix& a = bb.a;
    DenseMatrix ata(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t r = 0; r < a.rows(); ++r) ata(i, j) += a(r, i) * a(r, j);
    const auto ev = oracle::jacobi_eigenvalues(ata);
    EXPECT_NEAR(bb.sigma_min, std::sqrt(std::max(0.0, ev.back())), 1e-9);
    EXPECT_GE(bb.sigma_min * report.alpha, 1.0 - 1e-9);
  }
}

TEST(UsefulBasis, TooFewFunctionsIsAnError) {
  const auto e = exact(IsingModel::uniform(make_cycle(4), 0.0));
  const auto blocks = detect_blocks(e.spec.eigenvalues, 0.9, 6, 10.0);
  EXPECT_THROW(useful_basis_alpha(parity_family(4, 1), e.spec, blocks), InputError);
}

TEST(PtG, IdentityAndEigenRelation) {
  const auto e = exact(IsingModel::uniform(make_cycle(6), 0.25));
  const auto v = row_of(e.spec.eigenvectors, 3);
  EXPECT_EQ(exact_Pt_g(e.p, v, 0), v);
  const auto p7 = exact_Pt_g(e.p, v, 7);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(p7[k], std::pow(e.spec.eigenvalues[3], 7) * v[k], 1e-8);
}

TEST(PtG, ParityEigenvaluesOnFreeChain) {
  const std::size_t n = 5;
  const auto e = exact(IsingModel::uniform(make_cycle(n), 0.0));
  const auto fam = parity_family(n, n);
  const auto g = tabulate(fam, *e.support);
  for (std::size_t m = 0; m < fam.size(); ++m) {
    const auto row = row_of(g, m);
    const auto pg = exact_Pt_g(e.p, row, 1);
    const double lambda = 1.0 - static_cast<double>(fam[m].sites.size()) / (2.0 * n);
    for (std::size_t k = 0; k < row.size(); ++k) ASSERT_NEAR(pg[k], lambda * row[k], 1e-13);
  }
}

TEST(Reconstruct, ParityBasisIsExact) {
  const auto e = exact(IsingModel::uniform(make_cycle(4), 0.0));
  const auto g = tabulate(parity_family(4, 4), *e.support);
  for (std::size_t l = 0; l < e.spec.size(); ++l) {
    const auto r = reconstruct_eigenvector(e.spec, e.p, g, l, 0);
    EXPECT_LT(r.residual, 1e-6);
  }
  // Top eigenvector is the constant; mass 1 from chi_empty.
  const auto r0 = reconstruct_eigenvector(e.spec, e.p, g, 0, 0);
  EXPECT_NEAR(r0.coefficient_mass, 1.0, 1e-6);
}

TEST(Reconstruct, ConstantFromConstantFunction) {
  const auto e = exact(IsingModel::uniform(make_cycle(6), 0.4));
  DenseMatrix g(1, e.pi.size(), 1.0);
  EXPECT_LT(reconstruct_eigenvector(e.spec, e.p, g, 0, 3).residual, 1e-6);
  EXPECT_THROW(reconstruct_eigenvector(e.spec, e.p, g, 0, 30, 10), SizeCapError);
}

TEST(ReconstructionBounds, FormulaInstantiation) {
  const auto b = theorem1_bounds(3, 1, 0.5, 0.0, 2.0, 0.1);
  EXPECT_NEAR(b.b, (2 * 2.0 * 3 * 1) / 0.1, 1e-9);
  EXPECT_NEAR(b.tau_max_real, (std::log(3.0) + std::log(1.0) + std::log(2.0) + std::log(10.0)) / std::log(2.0), 1e-12);
  EXPECT_GT(theorem1_bounds(3, 2, 0.5, 1.0, 4.0, 0.1).log_b, theorem1_bounds(3, 2, 0.5, 1.0, 2.0, 0.1).log_b);
  EXPECT_GT(theorem1_bounds(3, 2, 0.9999, 1.0, 2.0, 0.1).tau_max, theorem1_bounds(3, 2, 0.9, 1.0, 2.0, 0.1).tau_max);
  EXPECT_THROW(theorem1_bounds(3, 2, 1.0, 1.0, 2.0, 0.1), InputError);
  EXPECT_THROW(theorem1_bounds(3, 2, 0.5, 1.0, 2.0, 0.0), InputError);
}

TEST(MixingTime, MatchesMatrixPowerOracle) {
  for (const MrfModel& m : {MrfModel(IsingModel::uniform(make_cycle(5), 0.3)), MrfModel(ColoringModel(make_path(4), 3))}) {
    const auto support = enumerate_support(m);
    const auto pi = stationary_exact(*support);
    const auto p = exact_transition_matrix(support);
    std::size_t expect = 0;
    DenseMatrix pt = DenseMatrix::identity(pi.size());
    for (std::size_t t = 0;; ++t) {
      double worst = 0.0;
      for (std::size_t a = 0; a < pi.size(); ++a) worst = std::max(worst, oracle::tv(row_of(pt, a), pi));
      if (worst <= 0.25) {
        expect = t;
        break;
      }
      pt = oracle::multiply(pt, p.p);
    }
    EXPECT_EQ(mixing_time(sparse_transition_matrix(support), pi), expect);
  }
}
