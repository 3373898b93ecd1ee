#include "mrflearn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mrflearn/basis.hpp"
#include "mrflearn/eigensolver.hpp"
#include "mrflearn/errors.hpp"
#include "mrflearn/gibbs.hpp"
#include "mrflearn/learners.hpp"
#include "mrflearn/parallel.hpp"
#include "mrflearn/spectral.hpp"

namespace mrflearn {

namespace {

std::vector<double> majority_values(const SupportIndex& support) {
  std::vector<double> f(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) f[k] = majority(support.values(k));
  return f;
}

std::string graph_label(GraphKind kind, std::size_t n, double p) {
  switch (kind) {
    case GraphKind::kComplete: return "K" + std::to_string(n);
    case GraphKind::kCycle: return "C" + std::to_string(n);
    case GraphKind::kPath: return "P" + std::to_string(n);
    case GraphKind::kErdosRenyi: {
      std::ostringstream os;
      os << "G(" << n << "," << p << ")";
      return os.str();
    }
    case GraphKind::kGrid: break;
  }
  return to_string(kind) + std::to_string(n);
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::size_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

SpectrumTable spectrum_experiment(const Graph& graph, std::span<const double> betas) {
  SpectrumTable out;
  out.betas.assign(betas.begin(), betas.end());
  for (double beta : betas) {
    const MrfModel model = IsingModel::uniform(graph, beta);
    const TransitionMatrix p = exact_transition_matrix(model);
    out.eigenvalues.push_back(chain_eigenvalues(p, stationary_exact(*p.support)));
  }
  return out;
}

std::string to_string(EigenCountPolicy policy) {
  return policy == EigenCountPolicy::kLiteral ? "literal" : "dimension-matched";
}

EigenCountPolicy parse_eigen_count_policy(const std::string& name) {
  if (name == "dimension-matched") return EigenCountPolicy::kDimensionMatched;
  if (name == "literal") return EigenCountPolicy::kLiteral;
  throw InputError("unknown eigenvector-count policy '" + name + "'");
}

std::size_t eigen_count(EigenCountPolicy policy, std::size_t n, std::size_t k, std::size_t states) {
  std::uint64_t m = 0;
  if (policy == EigenCountPolicy::kDimensionMatched) {
    for (std::size_t j = 0; j <= std::min(k, n); ++j) m += binomial(n, j);
  } else {
    m = 1;
    for (std::size_t j = 0; j < k && m < states; ++j) m *= n;
  }
  return static_cast<std::size_t>(std::min<std::uint64_t>(m, states));
}

double polynomial_error(const SupportIndex& support, std::span<const double> pi,
                        std::span<const double> f, std::size_t k) {
  if (pi.size() != support.size() || f.size() != support.size()) {
    throw InputError("polynomial_error: length mismatch");
  }
  const DenseMatrix chi = tabulate(parity_family(support.num_sites(), k), support);
  const std::size_t m = chi.rows();
  const std::size_t s = support.size();
  // Rows scaled by sqrt(pi) turn the weighted Gram into a plain one.
  DenseMatrix a(m, s);
  std::vector<double> fw(s);
  for (std::size_t x = 0; x < s; ++x) fw[x] = std::sqrt(pi[x]) * f[x];
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t x = 0; x < s; ++x) a(r, x) = std::sqrt(pi[x]) * chi(r, x);
  }
  DenseMatrix gram(m, m);
  std::vector<double> rhs(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto ar = a.row(r);
    rhs[r] = std::inner_product(ar.begin(), ar.end(), fw.begin(), 0.0);
    for (std::size_t c = 0; c <= r; ++c) {
      const auto ac = a.row(c);
      gram(r, c) = gram(c, r) = std::inner_product(ar.begin(), ar.end(), ac.begin(), 0.0);
    }
    gram(r, r) += 1e-10;
  }
  const std::vector<double> coef = solve_spd(gram, rhs);
  double err = 0.0;
  for (std::size_t x = 0; x < s; ++x) {
    double p = 0.0;
    for (std::size_t r = 0; r < m; ++r) p += coef[r] * chi(r, x);
    err += pi[x] * (f[x] - p) * (f[x] - p);
  }
  return err;
}

std::vector<ApproximationRow> majority_table(const MajorityTableSpec& spec) {
  if (spec.betas.empty() || spec.degrees.empty() || spec.graph_seeds.empty()) {
    throw InputError("majority_table: empty beta, degree or seed grid");
  }
  struct Cell {
    std::uint64_t seed;
    double beta;
  };
  std::vector<Cell> cells;
  for (std::uint64_t seed : spec.graph_seeds) {
    for (double beta : spec.betas) cells.push_back({seed, beta});
  }
  GraphParams params;
  params.n = spec.n;
  params.p = spec.p;
  const std::string label = graph_label(spec.kind, spec.n, spec.p);
  std::vector<std::vector<ApproximationRow>> results(cells.size());
  parallel_for(cells.size(), spec.workers, [&](std::size_t c) {
    const Graph graph = make_graph(spec.kind, params, cells[c].seed);
    const MrfModel model = IsingModel::uniform(graph, cells[c].beta);
    const TransitionMatrix p = exact_transition_matrix(model);
    const SupportIndex& support = *p.support;
    const std::vector<double> pi = stationary_exact(support);
    const std::vector<double> f = majority_values(support);
    // Majority is odd under the global flip only when n is odd.
    SpectralProjection proj;
    if (spec.n % 2 == 1) {
      proj = flip_symmetric_projection(p, pi, f);
    } else {
      DenseMatrix fs(1, f.size());
      std::copy(f.begin(), f.end(), fs.row(0).begin());
      proj = spectral_projection(p, pi, fs);
    }
    for (std::size_t k : spec.degrees) {
      ApproximationRow row;
      row.graph = label;
      row.beta = cells[c].beta;
      row.degree = k;
      row.graph_seed = cells[c].seed;
      row.eigen_count = eigen_count(spec.policy, spec.n, k, support.size());
      for (std::size_t l = row.eigen_count; l < proj.eigenvalues.size(); ++l) {
        row.eigen_error += proj.coefficients(l, 0) * proj.coefficients(l, 0);
      }
      row.poly_error = polynomial_error(support, pi, f, k);
      results[c].push_back(row);
    }
  });
  std::vector<ApproximationRow> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

StabilityCurve stability_experiment(const MrfModel& model, const LabelFunction& f,
                                    std::span<const double> ts) {
  const TransitionMatrix p = exact_transition_matrix(model);
  const std::vector<double> pi = stationary_exact(*p.support);
  DenseMatrix fs(1, pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const int v = f(p.support->state(k));
    if (v != 1 && v != -1) throw InputError("stability_experiment: f must be +1/-1 valued");
    fs(0, k) = v;
  }
  const SpectralProjection proj = spectral_projection(p, pi, fs);
  std::vector<double> fhat(proj.eigenvalues.size());
  for (std::size_t l = 0; l < fhat.size(); ++l) fhat[l] = proj.coefficients(l, 0);
  return stability_curve(proj.eigenvalues, fhat, ts, p.support->num_sites());
}

int JuntaTarget::operator()(std::span<const std::int8_t> x) const {
  std::uint64_t code = 0;
  for (int v : variables) {
    const std::int8_t val = x[static_cast<std::size_t>(v)];
    code = code * alphabet + static_cast<std::uint64_t>(spins ? (val > 0 ? 1 : 0) : val);
  }
  return table[code];
}

JuntaTarget random_junta(const SupportIndex& support, std::size_t k, RngStream& rng) {
  const MrfModel& model = support.model();
  const std::size_t n = support.num_sites();
  if (k == 0 || k > n) throw InputError("random_junta: need 1 <= k <= n");
  JuntaTarget target;
  target.alphabet = alphabet_size(model);
  target.spins = is_ising(model);
  std::size_t cells = 1;
  for (std::size_t j = 0; j < k; ++j) cells *= target.alphabet;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> sites(n);
    std::iota(sites.begin(), sites.end(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(sites[j], sites[j + rng.below(n - j)]);
    }
    target.variables.assign(sites.begin(), sites.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(target.variables.begin(), target.variables.end());
    target.table.resize(cells);
    for (auto& v : target.table) v = rng.coin() ? 1 : -1;
    // Relevance as the walk learner sees it: some single-site move inside
    // the support flips the label.
    std::vector<char> relevant(k, 0);
    Configuration y;
    for (std::size_t x = 0; x < support.size(); ++x) {
      y = support.state(x);
      const int fx = target(y.values);
      for (std::size_t j = 0; j < k; ++j) {
        if (relevant[j]) continue;
        const auto site = static_cast<std::size_t>(target.variables[j]);
        const std::int8_t old = y[site];
        for (std::size_t a = 0; a < target.alphabet && !relevant[j]; ++a) {
          const auto v = static_cast<std::int8_t>(target.spins ? (a == 0 ? -1 : 1) : a);
          if (v == old) continue;
          y[site] = v;
          if (support.index_of(y) != SupportIndex::npos && target(y.values) != fx) relevant[j] = 1;
        }
        y[site] = old;
      }
      if (std::all_of(relevant.begin(), relevant.end(), [](char r) { return r != 0; })) return target;
    }
  }
  throw NumericalError("random_junta: could not draw a junta with all variables relevant");
}

JuntaExperimentResult junta_experiment(const MrfModel& model, const JuntaExperimentSpec& spec) {
  if (spec.trials == 0) throw InputError("junta_experiment: need at least one trial");
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw InputError("junta_experiment: delta must lie in (0, 1)");
  const auto support = enumerate_support(model);
  const std::vector<double> pi = stationary_exact(*support);
  JuntaExperimentResult out;
  out.conditions = verify_junta_conditions(model, spec.k);
  if (spec.walk_length > 0) {
    out.walk_length = spec.walk_length;
  } else {
    out.mixing_time = mixing_time(sparse_transition_matrix(support), pi);
    out.walk_length = junta_walk_length(out.conditions, alphabet_size(model), spec.k, spec.delta,
                                        out.mixing_time);
  }
  const ChainOracle oracle(model);
  const StateSampler start = exact_pi_sampler(support, pi);
  out.trials.resize(spec.trials);
  parallel_for(spec.trials, spec.workers, [&](std::size_t i) {
    JuntaTrial& trial = out.trials[i];
    trial.seed = i;
    trial.walk_length = out.walk_length;
    RngStream rng(spec.master_seed, {i});
    const JuntaTarget target = random_junta(*support, spec.k, rng);
    trial.target_variables = target.variables;
    Configuration x = start(rng);
    JuntaAccumulator acc(x.size(), oracle.alphabet_size(), target.spins);
    std::vector<char> in_target(x.size(), 0);
    for (int v : target.variables) in_target[static_cast<std::size_t>(v)] = 1;
    int label = target(x.values);
    acc.observe(x, label, -1);
    // Lazy holds are skipped in bulk; a run cut off by the end is all holds.
    std::size_t step = 1;
    while (step < out.walk_length) {
      const std::size_t holds = std::min<std::uint64_t>(lazy_holds(rng), out.walk_length - step);
      acc.hold(holds);
      step += holds;
      if (step == out.walk_length) break;
      const int site = oracle.resample(x, rng);
      if (site >= 0 && in_target[static_cast<std::size_t>(site)]) label = target(x.values);
      acc.observe(x, label, site);
      ++step;
    }
    const JuntaHypothesis h = acc.finish();
    trial.found_variables = h.variables;
    bool ok = h.variables == target.variables;
    for (std::size_t s = 0; ok && s < support->size(); ++s) {
      ok = h(support->values(s)) == target(support->values(s));
    }
    trial.recovered = ok;
  });
  const auto wins = std::count_if(out.trials.begin(), out.trials.end(),
                                  [](const JuntaTrial& t) { return t.recovered; });
  out.success_rate = static_cast<double>(wins) / static_cast<double>(spec.trials);
  return out;
}

std::vector<AgnosticRow> agnostic_experiment(const MrfModel& model, const AgnosticSpec& spec) {
  if (spec.budgets.empty()) throw InputError("agnostic_experiment: empty budget grid");
  if (spec.train_size == 0 || spec.validation_size == 0) {
    throw InputError("agnostic_experiment: sample sizes must be positive");
  }
  if (!is_ising(model)) throw InputError("agnostic_experiment: majority target needs an Ising model");
  const auto support = enumerate_support(model);
  const std::vector<double> pi = stationary_exact(*support);
  const ChainOracle oracle(model);
  const BasisFamily family = conjunction_family(support->num_sites(), spec.basis_degree);
  const StateSampler sampler = exact_pi_sampler(support, pi);

  std::vector<Configuration> all(support->size());
  std::vector<int> truth(support->size());
  std::vector<double> truth_real(support->size());
  for (std::size_t k = 0; k < support->size(); ++k) {
    all[k] = support->state(k);
    truth[k] = majority(all[k].values);
    truth_real[k] = truth[k];
  }
  const double opt = best_junta_error(all, truth, pi, spec.opt_junta_size);

  FeatureConfig cfg;
  cfg.tau_max = spec.tau_max;
  cfg.time_grid = spec.time_grid;
  cfg.scheme = spec.scheme;
  cfg.samples = spec.samples_T > 0
                    ? spec.samples_T
                    : hoeffding_T(spec.epsilon2, spec.delta,
                                  static_cast<double>(spec.tau_max) *
                                      static_cast<double>(support->size()) *
                                      static_cast<double>(family.functions.size()));
  cfg.validate();
  FeatureBuildOptions options;
  options.workers = spec.workers;

  auto rows_of = [](const FeatureSet& table, const std::vector<std::size_t>& idx) {
    FeatureSet fs;
    fs.descriptors = table.descriptors;
    fs.config = table.config;
    fs.master_seed = table.master_seed;
    fs.phi = DenseMatrix(idx.size(), table.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto src = table.phi.row(idx[i]);
      std::copy(src.begin(), src.end(), fs.phi.row(i).begin());
    }
    return fs;
  };
  auto states_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<Configuration> xs(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) xs[i] = all[idx[i]];
    return xs;
  };

  std::vector<AgnosticRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    auto draw = [&](std::size_t count, std::uint64_t stream) {
      std::vector<std::size_t> idx(count);
      for (std::size_t i = 0; i < count; ++i) {
        RngStream rng(seed, {stream, i});
        idx[i] = support->index_of(sampler(rng));
      }
      return idx;
    };
    const std::vector<std::size_t> train = draw(spec.train_size, 0);
    const std::vector<std::size_t> valid = draw(spec.validation_size, 1);

    // Shared endpoints make features a function of the state, so one build
    // over the support serves every split. Per-entry seeds are keyed by the
    // example index, so each split gets its own build.
    FeatureSet train_fs;
    FeatureSet valid_fs;
    FeatureSet eval_fs;
    if (spec.scheme == SeedScheme::kSharedEndpoints) {
      eval_fs = build_feature_set(oracle, family, all, cfg, derive_seed(seed, {2}), options);
      train_fs = rows_of(eval_fs, train);
      valid_fs = rows_of(eval_fs, valid);
    } else {
      train_fs = build_feature_set(oracle, family, states_of(train), cfg, derive_seed(seed, {2}), options);
      valid_fs = build_feature_set(oracle, family, states_of(valid), cfg, derive_seed(seed, {3}), options);
      eval_fs = build_feature_set(oracle, family, all, cfg, derive_seed(seed, {4}), options);
    }
    std::vector<int> train_y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_y[i] = truth[train[i]];
    std::vector<double> valid_y(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) valid_y[i] = truth[valid[i]];

    AgnosticRow row;
    row.seed = seed;
    row.opt = opt;
    row.tau_max = spec.tau_max;
    row.samples_T = cfg.samples;
    double best = std::numeric_limits<double>::infinity();
    for (double w : spec.budgets) {
      const Hypothesis h = fit_hypothesis(train_fs, family, train_y, w);
      const double verr = randomized_threshold_error(hypothesis_values(h, valid_fs), valid_y);
      row.validation_errors.push_back(verr);
      if (verr < best) {
        best = verr;
        row.budget = w;
        row.training_objective = h.training_objective;
        row.err = randomized_threshold_error(hypothesis_values(h, eval_fs), truth_real, pi);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mrflearn
