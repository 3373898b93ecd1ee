#include "mrflearn/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mrflearn/errors.hpp"
#include "mrflearn/kernels.hpp"
#include "mrflearn/parallel.hpp"

namespace mrflearn {

std::string to_string(SeedScheme scheme) {
  return scheme == SeedScheme::kPerEntry ? "per-entry" : "shared-endpoints";
}

SeedScheme parse_seed_scheme(const std::string& name) {
  if (name == "per-entry") return SeedScheme::kPerEntry;
  if (name == "shared-endpoints") return SeedScheme::kSharedEndpoints;
  throw InputError("unknown seed scheme '" + name + "' (expected per-entry or shared-endpoints)");
}

std::vector<std::size_t> FeatureConfig::times() const {
  if (!time_grid.empty()) return time_grid;
  std::vector<std::size_t> out(tau_max + 1);
  for (std::size_t t = 0; t <= tau_max; ++t) out[t] = t;
  return out;
}

void FeatureConfig::validate() const {
  if (samples < 1) throw InputError("feature config: T must be at least 1");
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    if (time_grid[i] > tau_max) throw InputError("feature config: time grid exceeds tau_max");
    if (i > 0 && time_grid[i] <= time_grid[i - 1]) {
      throw InputError("feature config: time grid must be strictly increasing");
    }
  }
}

std::vector<std::size_t> geometric_time_grid(std::size_t tau_max) {
  std::vector<std::size_t> out{0};
  for (std::size_t t = 1; t < tau_max; t *= 2) out.push_back(t);
  if (tau_max > 0) out.push_back(tau_max);
  return out;
}

double estimate_phi(const ChainOracle& oracle, const BasisFunction& g, const Configuration& x,
                    std::size_t t, std::size_t samples, RngStream& rng) {
  if (samples < 1) throw InputError("estimate_phi: T must be at least 1");
  if (t == 0) return g(x);
  double total = 0.0;
  Configuration y;
  for (std::size_t j = 0; j < samples; ++j) {
    y = x;
    oracle.run(y, t, rng);
    total += g(y);
  }
  return total / static_cast<double>(samples);
}

namespace {

void fill_per_entry(const ChainOracle& oracle, const BasisFamily& family,
                    const std::vector<Configuration>& xs, const std::vector<std::size_t>& times,
                    std::size_t samples, std::uint64_t master, std::size_t workers,
                    DenseMatrix& phi) {
  const std::size_t m_count = family.size();
  parallel_for(xs.size(), workers, [&](std::size_t i) {
    Configuration y;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      const std::size_t t = times[ti];
      for (std::size_t m = 0; m < m_count; ++m) {
        double value;
        if (t == 0) {
          value = family[m](xs[i]);
        } else {
          double total = 0.0;
          for (std::size_t j = 0; j < samples; ++j) {
            RngStream rng(master, {i, t, m, j});
            y = xs[i];
            oracle.run(y, t, rng);
            total += family[m](y);
          }
          value = total / static_cast<double>(samples);
        }
        phi(i, ti * m_count + m) = value;
      }
    }
  });
}

// Basis values per state code, evaluated once.
class BasisCache {
 public:
  BasisCache(const BasisFamily& family, const MrfModel& model) : family_(family), model_(model) {}

  std::span<const double> values(std::uint64_t code) {
    auto [it, inserted] = index_.try_emplace(code, index_.size());
    if (inserted) {
      const Configuration x = decode(model_, code);
      for (const auto& g : family_) table_.push_back(g(x));
    }
    return {table_.data() + it->second * family_.size(), family_.size()};
  }

 private:
  const BasisFamily& family_;
  const MrfModel& model_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<double> table_;
};

void fill_shared(const ChainOracle& oracle, const BasisFamily& family,
                 const std::vector<Configuration>& xs, const std::vector<std::size_t>& times,
                 std::size_t samples, std::uint64_t master, std::size_t workers,
                 DenseMatrix& phi) {
  const MrfModel& model = oracle.model();
  if (code_space_size(model) == 0) {
    throw SizeCapError("shared-endpoint features need |A|^n to fit in 64 bits");
  }
  const std::size_t m_count = family.size();
  // Distinct example states, in first-seen order.
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<std::size_t> first;
  std::vector<std::size_t> slot_of(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(encode(model, xs[i]), first.size());
    if (inserted) first.push_back(i);
    slot_of[i] = it->second;
  }
  DenseMatrix distinct(first.size(), phi.cols());
  const std::size_t chunks = std::max<std::size_t>(1, std::min(workers, first.size()));
  parallel_for(chunks, chunks, [&](std::size_t chunk) {
    BasisCache cache(family, model);
    std::vector<std::uint64_t> ends(samples);
    Configuration y;
    for (std::size_t d = chunk; d < first.size(); d += chunks) {
      const Configuration& x = xs[first[d]];
      const std::uint64_t code = encode(model, x);
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const std::size_t t = times[ti];
        double* out = &distinct(d, ti * m_count);
        if (t == 0) {
          const auto g = cache.values(code);
          std::copy(g.begin(), g.end(), out);
          continue;
        }
        for (std::size_t j = 0; j < samples; ++j) {
          RngStream rng(master, {code, t, j});
          y = x;
          oracle.run(y, t, rng);
          ends[j] = encode(model, y);
        }
        std::sort(ends.begin(), ends.end());
        const double inv = 1.0 / static_cast<double>(samples);
        for (std::size_t a = 0; a < samples;) {
          std::size_t b = a;
          while (b < samples && ends[b] == ends[a]) ++b;
          const auto g = cache.values(ends[a]);
          kernels::active().axpy(static_cast<double>(b - a) * inv, g.data(), out, m_count);
          a = b;
        }
      }
    }
  });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::copy(distinct.row(slot_of[i]).begin(), distinct.row(slot_of[i]).end(), phi.row(i).begin());
  }
}

}  // namespace

FeatureSet build_feature_set(const ChainOracle& oracle, const BasisFamily& family,
                             const std::vector<Configuration>& xs, const FeatureConfig& config,
                             std::uint64_t master_seed, const FeatureBuildOptions& options) {
  config.validate();
  const auto times = config.times();
  const std::size_t cols = times.size() * family.size();
  if (cols > options.feature_cap) {
    throw SizeCapError("feature count " + std::to_string(cols) + " exceeds the cap of " +
                       std::to_string(options.feature_cap));
  }
  for (const auto& x : xs) check_shape(oracle.model(), x);
  FeatureSet fs;
  fs.config = config;
  fs.master_seed = master_seed;
  fs.phi = DenseMatrix(xs.size(), cols);
  for (std::size_t t : times) {
    for (std::size_t m = 0; m < family.size(); ++m) fs.descriptors.emplace_back(t, m);
  }
  if (config.scheme == SeedScheme::kPerEntry) {
    fill_per_entry(oracle, family, xs, times, config.samples, master_seed, options.workers, fs.phi);
  } else {
    fill_shared(oracle, family, xs, times, config.samples, master_seed, options.workers, fs.phi);
  }
  for (double& v : fs.phi.data()) v = std::clamp(v, -1.0, 1.0);
  return fs;
}

std::size_t hoeffding_T(double epsilon2, double delta, double universe) {
  if (!(epsilon2 > 0.0)) throw InputError("hoeffding_T: epsilon2 must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("hoeffding_T: delta must lie in (0, 1)");
  if (!(universe >= 1.0)) throw InputError("hoeffding_T: universe must be at least 1");
  // The small offset keeps an exact integer from rounding up through log error.
  const double t = std::ceil(std::log(universe / delta) / (epsilon2 * epsilon2) - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, t));
}

}  // namespace mrflearn
