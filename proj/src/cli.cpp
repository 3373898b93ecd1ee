#include "mrflearn/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrflearn/config.hpp"
#include "mrflearn/errors.hpp"
#include "mrflearn/experiments.hpp"
#include "mrflearn/io.hpp"
#include "mrflearn/noise.hpp"
#include "mrflearn/parallel.hpp"
#include "mrflearn/spectral.hpp"
#include "mrflearn/support.hpp"

#ifndef MRFLEARN_VERSION
#define MRFLEARN_VERSION "unknown"
#endif

namespace mrflearn {

namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  std::uint64_t seed = 1;
  fs::path out_dir;
  fs::path cache_dir;
  std::size_t workers = 1;
  std::uint64_t cap_states = kDefaultStateCap;
  std::vector<std::string> artifacts;
  std::ostream* log = nullptr;

  std::ofstream open(const std::string& name) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw InputError("cannot write '" + (out_dir / name).string() + "'");
    artifacts.push_back(name);
    return f;
  }
};

void require_enumerable(const MrfModel& model, std::uint64_t cap) {
  const std::uint64_t size = code_space_size(model);
  if (size == 0 || size > cap) {
    throw SizeCapError("state space |A|^n = " + (size == 0 ? std::string("> 2^64") : std::to_string(size)) +
                       " exceeds the cap of " + std::to_string(cap));
  }
}

MrfModel ising_at(const MrfModel& model, double beta) {
  const auto* ising = std::get_if<IsingModel>(&model);
  if (ising == nullptr) throw InputError("this command needs an Ising model");
  return IsingModel::uniform(ising->graph(), beta, ising->field());
}

void cmd_spectrum(Context& ctx) {
  const MrfModel base = build_model(ctx.config);
  require_enumerable(base, ctx.cap_states);
  const std::vector<double> betas = ctx.config.get_doubles("spectrum", "betas", {0.0, 0.02, 0.1, 1.0});
  SpectrumTable table;
  table.betas = betas;
  for (double beta : betas) {
    const MrfModel model = ising_at(base, beta);
    if (ctx.cache_dir.empty()) {
      const TransitionMatrix p = exact_transition_matrix(model);
      table.eigenvalues.push_back(chain_eigenvalues(p, stationary_exact(*p.support)));
      continue;
    }
    const fs::path path = spectrum_cache_path(ctx.cache_dir, model);
    std::string warning;
    std::optional<Spectrum> spec = read_spectrum_cache(path, model, &warning);
    if (!warning.empty()) *ctx.log << "warning: " << warning << "; recomputing\n";
    if (!spec) {
      const TransitionMatrix p = exact_transition_matrix(model);
      spec = eigendecompose(p, stationary_exact(*p.support));
      write_spectrum_cache(path, model, *spec);
    }
    table.eigenvalues.push_back(spec->eigenvalues);
  }
  auto f = ctx.open("spectrum.csv");
  write_spectrum_csv(f, table);
}

void cmd_majority(Context& ctx) {
  MajorityTableSpec spec;
  spec.kind = parse_graph_kind(ctx.config.get("majority", "graph", "complete"));
  spec.n = ctx.config.get_size("majority", "n", 11);
  spec.p = ctx.config.get_double("majority", "p", 0.3);
  std::vector<double> default_betas{0.02, 0.05, 0.1, 0.2};
  if (spec.kind == GraphKind::kCycle) default_betas = {0.1, 0.2, 0.5, 1.0};
  if (spec.kind == GraphKind::kErdosRenyi) default_betas = {0.05, 0.1, 0.2, 0.5};
  spec.betas = ctx.config.get_doubles("majority", "betas", default_betas);
  spec.degrees = ctx.config.get_sizes("majority", "degrees", {2, 4});
  spec.policy = parse_eigen_count_policy(ctx.config.get("majority", "policy", "dimension-matched"));
  std::vector<std::size_t> default_seeds{0};
  if (spec.kind == GraphKind::kErdosRenyi) {
    default_seeds.clear();
    for (std::size_t s = 0; s < 20; ++s) default_seeds.push_back(s);
  }
  spec.graph_seeds.clear();
  for (std::size_t s : ctx.config.get_sizes("majority", "graph_seeds", default_seeds)) spec.graph_seeds.push_back(s);
  spec.workers = ctx.workers;
  if (spec.n >= 64 || (std::uint64_t{1} << spec.n) > ctx.cap_states) {
    throw SizeCapError("majority table: 2^" + std::to_string(spec.n) + " states exceed the cap");
  }
  const auto rows = majority_table(spec);
  auto f = ctx.open("majority.csv");
  write_majority_csv(f, rows);
}

void cmd_learn(Context& ctx) {
  const MrfModel model = build_model(ctx.config);
  require_enumerable(model, ctx.cap_states);
  AgnosticSpec spec;
  const auto& c = ctx.config;
  spec.basis_degree = c.get_size("learn", "basis_degree", 2);
  spec.tau_max = c.get_size("learn", "tau_max", 30);
  spec.samples_T = c.get_size("learn", "T", 0);
  spec.epsilon2 = c.get_double("learn", "epsilon2", 0.05);
  spec.delta = c.get_double("learn", "delta", 0.01);
  spec.train_size = c.get_size("learn", "train", 3000);
  spec.validation_size = c.get_size("learn", "validation", 1000);
  spec.budgets = c.get_doubles("learn", "budgets", {1.0, 4.0, 16.0});
  spec.seeds.clear();
  for (std::size_t s : c.get_sizes("learn", "seeds", {static_cast<std::size_t>(ctx.seed)})) spec.seeds.push_back(s);
  spec.scheme = parse_seed_scheme(c.get("learn", "scheme", "shared-endpoints"));
  const std::string grid = c.get("learn", "time_grid", "full");
  if (grid == "geometric") {
    spec.time_grid = geometric_time_grid(spec.tau_max);
  } else if (grid != "full") {
    throw InputError("learn.time_grid must be full or geometric");
  }
  spec.opt_junta_size = c.get_size("learn", "opt_junta", 3);
  spec.workers = ctx.workers;
  const auto rows = agnostic_experiment(model, spec);
  auto f = ctx.open("agnostic.csv");
  write_agnostic_csv(f, rows);
}

void cmd_junta(Context& ctx) {
  const MrfModel model = build_model(ctx.config);
  require_enumerable(model, ctx.cap_states);
  JuntaExperimentSpec spec;
  spec.k = ctx.config.get_size("junta", "k", 3);
  spec.delta = ctx.config.get_double("junta", "delta", 0.05);
  spec.trials = ctx.config.get_size("junta", "trials", 100);
  spec.walk_length = ctx.config.get_size("junta", "walk_length", 0);
  spec.master_seed = ctx.seed;
  spec.workers = ctx.workers;
  const auto result = junta_experiment(model, spec);
  auto f = ctx.open("junta.csv");
  write_junta_csv(f, result);
  *ctx.log << "junta: c = " << result.conditions.c << ", beta = " << result.conditions.beta
           << ", mixing time = " << result.mixing_time << ", walk length = " << result.walk_length
           << ", success rate = " << result.success_rate << '\n';
}

LabelFunction noise_target(const Context& ctx, std::size_t n) {
  const std::string target = ctx.config.get("noise", "target", "majority");
  if (target == "majority") return [](const Configuration& x) { return majority(x.values); };
  if (target == "halfspace") {
    RngStream rng(static_cast<std::uint64_t>(ctx.config.get_int("noise", "halfspace_seed", 0)));
    Halfspace h = random_halfspace(n, rng);
    return [h](const Configuration& x) { return h(x.values); };
  }
  throw InputError("noise.target must be majority or halfspace");
}

void cmd_noise(Context& ctx) {
  const MrfModel model = build_model(ctx.config);
  const std::size_t n = num_sites(model);
  const LabelFunction f = noise_target(ctx, n);
  std::vector<double> ts = ctx.config.get_doubles("noise", "times", {});
  if (ts.empty()) {
    for (int t = 0; t <= 20; ++t) ts.push_back(t);
  }
  const std::string method = ctx.config.get("noise", "method", "exact");
  StabilityCurve curve;
  if (method == "exact") {
    require_enumerable(model, ctx.cap_states);
    curve = stability_experiment(model, f, ts);
    const std::vector<double> rhos = ctx.config.get_doubles("noise", "rhos", {});
    if (!rhos.empty()) {
      const TransitionMatrix p = exact_transition_matrix(model);
      const auto pi = stationary_exact(*p.support);
      DenseMatrix fv(1, pi.size());
      for (std::size_t k = 0; k < pi.size(); ++k) fv(0, k) = f(p.support->state(k));
      const SpectralProjection proj = spectral_projection(p, pi, fv);
      std::vector<double> fhat(pi.size());
      for (std::size_t l = 0; l < fhat.size(); ++l) fhat[l] = proj.coefficients(l, 0);
      auto tf = ctx.open("tail.csv");
      tf << "rho,t,ell_star,tail,bound,slack,corrected_bound,corrected_slack\n";
      for (double rho : rhos) {
        const TailCheck tc = tail_mass_check(proj.eigenvalues, fhat, rho);
        tf << format_double(rho) << ',' << format_double(tc.t) << ',' << tc.ell_star << ','
           << format_double(tc.tail) << ',' << format_double(tc.bound) << ',' << format_double(tc.slack) << ','
           << format_double(tc.corrected_bound) << ',' << format_double(tc.corrected_slack) << '\n';
      }
    }
  } else if (method == "sampled") {
    const ChainOracle oracle(model);
    const std::size_t pairs = ctx.config.get_size("noise", "pairs", 100000);
    StateSampler sampler;
    const std::uint64_t size = code_space_size(model);
    if (size != 0 && size <= ctx.cap_states) {
      const auto support = enumerate_support(model, ctx.cap_states);
      sampler = exact_pi_sampler(support, stationary_exact(*support));
    } else {
      sampler = burn_in_sampler(oracle, default_burn_in(n));
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      if (t < 0 || t != std::floor(t)) throw InputError("sampled noise sensitivity needs integer times");
      const NoiseReport r = noise_sensitivity_sampled(oracle, f, static_cast<std::size_t>(t), pairs,
                                                      derive_seed(ctx.seed, {i}), sampler, ctx.workers);
      curve.points.push_back({t, r.ns, 1.0 - 2.0 * r.ns});
    }
  } else {
    throw InputError("noise.method must be exact or sampled");
  }
  auto out = ctx.open("stability.csv");
  write_stability_csv(out, curve);
  if (method == "exact") {
    *ctx.log << "noise: fitted exponent = " << curve.fitted_exponent
             << ", worst Jensen slack = " << curve.worst_jensen_slack << '\n';
  }
}

void cmd_sample(Context& ctx) {
  const MrfModel model = build_model(ctx.config);
  const ChainOracle oracle(model);
  const std::size_t count = ctx.config.get_size("sample", "count", 1000);
  const std::size_t burn_in = ctx.config.get_size("sample", "burn_in", default_burn_in(num_sites(model)));
  const bool exact = ctx.config.get_bool("sample", "exact", false);
  StateSampler sampler;
  if (exact) {
    require_enumerable(model, ctx.cap_states);
    const auto support = enumerate_support(model, ctx.cap_states);
    sampler = exact_pi_sampler(support, stationary_exact(*support));
  } else {
    sampler = burn_in_sampler(oracle, burn_in);
  }
  std::vector<Configuration> xs(count);
  parallel_for(count, ctx.workers, [&](std::size_t i) {
    RngStream rng(ctx.seed, {0, i});
    xs[i] = sampler(rng);
  });
  auto f = ctx.open("samples.csv");
  f << "index,state\n";
  for (std::size_t i = 0; i < count; ++i) f << i << ',' << state_string(model, xs[i]) << '\n';
  const std::size_t walk_length = ctx.config.get_size("sample", "walk_length", 0);
  if (walk_length > 0) {
    RngStream rng(ctx.seed, {1});
    const Configuration start = sampler(rng);
    const LabeledWalk walk = labeled_walk(
        oracle, [&](const Configuration& x) { return is_ising(model) ? majority(x.values) : (x[0] == 0 ? 1 : -1); },
        start, walk_length, rng);
    auto w = ctx.open("walk.csv");
    write_walk_csv(w, model, walk);
  }
}

void cmd_verify(Context& ctx) {
  const MrfModel model = build_model(ctx.config);
  require_enumerable(model, ctx.cap_states);
  const TransitionMatrix p = exact_transition_matrix(model);
  const auto pi = stationary_exact(*p.support);
  struct Check {
    std::string name;
    double value;
    double threshold;
    bool pass;
  };
  std::vector<Check> checks;
  const double db = detailed_balance_violation(p, pi);
  checks.push_back({"detailed_balance_violation", db, 1e-12, db <= 1e-12});
  double min_diag = 1.0;
  double row_err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    min_diag = std::min(min_diag, p.p(i, i));
    double sum = 0.0;
    for (double v : p.p.row(i)) sum += v;
    row_err = std::max(row_err, std::fabs(sum - 1.0));
  }
  checks.push_back({"min_diagonal", min_diag, 0.5, min_diag >= 0.5 - 1e-15});
  checks.push_back({"row_sum_error", row_err, 1e-12, row_err <= 1e-12});
  double stat_err = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) v += pi[i] * p.p(i, j);
    stat_err = std::max(stat_err, std::fabs(v - pi[j]));
  }
  checks.push_back({"stationarity_error", stat_err, 1e-12, stat_err <= 1e-12});
  const Spectrum spec = eigendecompose(p, pi);
  const double top = spec.eigenvalues.front();
  checks.push_back({"top_eigenvalue_error", std::fabs(top - 1.0), 1e-9, std::fabs(top - 1.0) <= 1e-9});
  const double bottom = spec.eigenvalues.back();
  checks.push_back({"min_eigenvalue", bottom, 0.0, bottom >= -1e-12});
  double parseval = 0.0;
  const std::size_t functions = ctx.config.get_size("verify", "functions", 100);
  RngStream rng(ctx.seed, {7});
  std::vector<double> f(pi.size());
  for (std::size_t r = 0; r < functions; ++r) {
    for (double& v : f) v = rng.coin() ? 1.0 : -1.0;
    double sum = 0.0;
    for (double c : fourier_coefficients(f, spec)) sum += c * c;
    parseval = std::max(parseval, std::fabs(sum - 1.0));
  }
  checks.push_back({"parseval_error", parseval, 1e-9, parseval <= 1e-9});
  auto out = ctx.open("verify.csv");
  out << "check,value,threshold,pass\n";
  bool ok = true;
  for (const auto& c : checks) {
    out << c.name << ',' << format_double(c.value) << ',' << format_double(c.threshold) << ',' << (c.pass ? 1 : 0)
        << '\n';
    *ctx.log << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << c.value << '\n';
    ok = ok && c.pass;
  }
  out.close();
  if (!ok) throw NumericalError("verify: at least one invariant failed");
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int exit_code_for(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const SizeCapError& x) {
    err << "error (size cap): " << x.what() << '\n';
    return kExitSizeCap;
  } catch (const NumericalError& x) {
    err << "error (numerical): " << x.what() << '\n';
    return kExitNumerical;
  } catch (const InputError& x) {
    err << "error: " << x.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning boolean functions under Markov random field distributions"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand.
  app.fallthrough();
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string cache_dir;
  std::size_t workers = 0;
  std::uint64_t cap_states = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--cache", cache_dir, "spectrum cache directory");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--cap-states", cap_states, "cap on |A|^n for exact enumeration");
  app.add_option("--set", overrides, "override, section.key=value (repeatable)");

  using Command = void (*)(Context&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"spectrum", "eigenvalues of the chain for a grid of beta", cmd_spectrum},
      {"majority-table", "polynomial vs eigenvector approximation of majority", cmd_majority},
      {"learn", "agnostic learning with MCMC spectral features", cmd_learn},
      {"junta", "junta recovery from labeled random walks", cmd_junta},
      {"noise", "noise sensitivity and stability curves", cmd_noise},
      {"sample", "stationary samples and labeled walks", cmd_sample},
      {"verify", "invariant suite for a model", cmd_verify},
  };
  for (const auto& [name, help, _] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    Context ctx;
    if (!config_path.empty()) ctx.config = RunConfig::load(config_path);
    ctx.config.apply_environment([](const char* name) { return std::getenv(name); });
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw InputError("--set expects section.key=value");
      ctx.config.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (app.count("--seed")) ctx.config.set("run", "seed", std::to_string(seed));
    if (app.count("--out")) ctx.config.set("run", "out", out_dir);
    if (app.count("--cache")) ctx.config.set("run", "cache", cache_dir);
    if (app.count("--workers")) ctx.config.set("run", "workers", std::to_string(workers));
    if (app.count("--cap-states")) ctx.config.set("run", "cap_states", std::to_string(cap_states));

    ctx.seed = static_cast<std::uint64_t>(ctx.config.get_int("run", "seed", 1));
    ctx.out_dir = ctx.config.get("run", "out", "out");
    ctx.cache_dir = ctx.config.get("run", "cache", "");
    ctx.workers = std::max<std::size_t>(1, ctx.config.get_size("run", "workers", 1));
    ctx.cap_states = ctx.config.get_size("run", "cap_states", kDefaultStateCap);
    if (ctx.cap_states > kDefaultStateCap) {
      throw InputError("--cap-states may not exceed " + std::to_string(kDefaultStateCap));
    }
    ctx.log = &out;
    fs::create_directories(ctx.out_dir);

    std::string name;
    for (const auto& [cmd, _, fn] : commands) {
      if (app.got_subcommand(cmd)) {
        name = cmd;
        fn(ctx);
      }
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Manifest m;
    m.emplace_back("command", name);
    m.emplace_back("version", MRFLEARN_VERSION);
    m.emplace_back("dynamics_version", std::to_string(kDynamicsVersion));
    m.emplace_back("seed", std::to_string(ctx.seed));
    m.emplace_back("workers", std::to_string(ctx.workers));
    std::istringstream echo(ctx.config.echo());
    std::string section;
    for (std::string line; std::getline(echo, line);) {
      if (line.front() == '[') {
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find(" = ");
      m.emplace_back("config." + section + "." + line.substr(0, eq), line.substr(eq + 3));
    }
    std::string artifacts;
    for (const auto& a : ctx.artifacts) artifacts += (artifacts.empty() ? "" : ",") + a;
    m.emplace_back("artifacts", artifacts);
    m.emplace_back("finished_at", timestamp());
    m.emplace_back("wall_seconds", format_double(wall));
    write_manifest(ctx.out_dir / "manifest.txt", m);
    return kExitOk;
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

}  // namespace mrflearn
