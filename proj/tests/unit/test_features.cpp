#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mrflearn/basis.hpp"
#include "mrflearn/errors.hpp"
#include "mrflearn/features.hpp"
#include "mrflearn/spectral.hpp"
#include "mrflearn/support.hpp"

using namespace mrflearn;

TEST(Features, TimeZeroIsExact) {
  const ChainOracle oracle(IsingModel::uniform(make_cycle(6), 0.3));
  const auto fam = conjunction_family(6, 2);
  RngStream rng(1);
  const Configuration x{1, -1, 1, 1, -1, -1};
  for (const auto& g : fam) EXPECT_EQ(estimate_phi(oracle, g, x, 0, 17, rng), g(x));
  const auto one = parity_family(6, 0)[0];
  EXPECT_EQ(estimate_phi(oracle, one, x, 25, 40, rng), 1.0);
}

TEST(Features, EstimateWithinHoeffdingOfExact) {
  const IsingModel m = IsingModel::uniform(make_cycle(6), 0.1);
  const ChainOracle oracle(m);
  const auto support = enumerate_support(m);
  const auto p = exact_transition_matrix(support);
  const auto fam = conjunction_family(6, 2);
  const auto g = tabulate(fam, *support);
  RngStream rng(7);
  int within = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t k = rng.below(support->size());
    const std::size_t mi = rng.below(fam.size());
    const auto exact = exact_Pt_g(p, g.row(mi), 10);
    const double est = estimate_phi(oracle, fam[mi], support->state(k), 10, 10000, rng);
    within += std::abs(est - exact[k]) <= 0.05;
  }
  EXPECT_GE(within, trials * 99 / 100);
}

TEST(Features, HoeffdingT) {
  EXPECT_EQ(hoeffding_T(0.05, 0.01, 1e6), 7369u);
  EXPECT_EQ(static_cast<double>(hoeffding_T(0.05, 0.01, 1e6)), std::ceil(std::log(1e8) / 0.0025));
  const double delta = 0.5, universe = std::exp(1.0) * delta;
  EXPECT_EQ(hoeffding_T(1.0, delta, universe * (1 - 1e-12)), 1u);
  EXPECT_EQ(hoeffding_T(0.5, delta, universe * (1 - 1e-12)), 4u);
  EXPECT_EQ(hoeffding_T(0.25, delta, universe * (1 - 1e-12)), 16u);
  EXPECT_THROW(hoeffding_T(0.5, 0.5, 0.1), InputError);
  EXPECT_THROW(hoeffding_T(0.0, 0.5, 10), InputError);
}

TEST(Features, GridAndValidation) {
  EXPECT_EQ(geometric_time_grid(10), (std::vector<std::size_t>{0, 1, 2, 4, 8, 10}));
  EXPECT_EQ(geometric_time_grid(0), (std::vector<std::size_t>{0}));
  FeatureConfig c;
  c.tau_max = 3;
  EXPECT_EQ(c.times(), (std::vector<std::size_t>{0, 1, 2, 3}));
  c.samples = 0;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_EQ(parse_seed_scheme(to_string(SeedScheme::kSharedEndpoints)), SeedScheme::kSharedEndpoints);
  EXPECT_THROW(parse_seed_scheme("nope"), InputError);
}

TEST(Features, ShapeDeterminismAndTimeZeroColumns) {
  const ChainOracle oracle(IsingModel::uniform(make_cycle(5), 0.2));
  const auto fam = parity_family(5, 2);
  RngStream rng(3);
  std::vector<Configuration> xs;
  for (int i = 0; i < 12; ++i) {
    Configuration x;
    for (int s = 0; s < 5; ++s) x.values.push_back(rng.coin() ? 1 : -1);
    xs.push_back(x);
  }
  for (auto scheme : {SeedScheme::kPerEntry, SeedScheme::kSharedEndpoints}) {
    FeatureConfig cfg;
    cfg.tau_max = 6;
    cfg.samples = 20;
    cfg.time_grid = geometric_time_grid(6);
    cfg.scheme = scheme;
    const auto a = build_feature_set(oracle, fam, xs, cfg, 99);
    const auto b = build_feature_set(oracle, fam, xs, cfg, 99);
    ASSERT_EQ(a.rows(), xs.size());
    ASSERT_EQ(a.cols(), cfg.time_grid.size() * fam.size());
    EXPECT_TRUE(std::ranges::equal(a.phi.data(), b.phi.data()));
    const auto c = build_feature_set(oracle, fam, xs, cfg, 100);
    EXPECT_FALSE(std::ranges::equal(a.phi.data(), c.phi.data()));
    for (std::size_t col = 0; col < a.cols(); ++col) {
      const auto [t, m] = a.descriptors[col];
      EXPECT_EQ(t, cfg.time_grid[col / fam.size()]);
      EXPECT_EQ(m, col % fam.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_LE(std::abs(a.phi(i, col)), 1.0);
        if (t == 0) EXPECT_EQ(a.phi(i, col), fam[m](xs[i]));
      }
    }
  }
}

TEST(Features, SharedEndpointsReuseRepeatedStates) {
  const ChainOracle oracle(IsingModel::uniform(make_cycle(5), 0.2));
  const auto fam = conjunction_family(5, 1);
  const Configuration x{1, 1, -1, 1, -1};
  FeatureConfig cfg;
  cfg.tau_max = 4;
  cfg.samples = 30;
  cfg.scheme = SeedScheme::kSharedEndpoints;
  const auto f = build_feature_set(oracle, fam, {x, x}, cfg, 5);
  for (std::size_t col = 0; col < f.cols(); ++col) EXPECT_EQ(f.phi(0, col), f.phi(1, col));
}

TEST(Features, FeatureCap) {
  const ChainOracle oracle(IsingModel::uniform(make_cycle(5), 0.2));
  FeatureConfig cfg;
  cfg.tau_max = 100;
  FeatureBuildOptions opt;
  opt.feature_cap = 50;
  EXPECT_THROW(build_feature_set(oracle, parity_family(5, 1), {Configuration{1, 1, 1, 1, 1}}, cfg, 1, opt),
               SizeCapError);
}

TEST(Features, DeviationRateAtHoeffdingT) {
  // With T from the bound, all |phi - P^t g| <= eps2 except with probability delta.
  const IsingModel m = IsingModel::uniform(make_path(4), 0.2);
  const ChainOracle oracle(m);
  const auto support = enumerate_support(m);
  const auto p = exact_transition_matrix(support);
  const auto fam = parity_family(4, 1);
  const auto g = tabulate(fam, *support);
  FeatureConfig cfg;
  cfg.tau_max = 3;
  const double eps2 = 0.1, delta = 0.05;
  cfg.samples = hoeffding_T(eps2, delta, 4.0 * support->size() * fam.size());
  std::vector<Configuration> xs;
  for (std::size_t k = 0; k < support->size(); ++k) xs.push_back(support->state(k));
  const auto f = build_feature_set(oracle, fam, xs, cfg, 11);
  double worst = 0.0;
  for (std::size_t col = 0; col < f.cols(); ++col) {
    const auto [t, mi] = f.descriptors[col];
    const auto exact = exact_Pt_g(p, g.row(mi), t);
    for (std::size_t k = 0; k < xs.size(); ++k) worst = std::max(worst, std::abs(f.phi(k, col) - exact[k]));
  }
  EXPECT_LE(worst, eps2);
}
