#include "mrflearn/basis.hpp"

#include <algorithm>
#include <cmath>

#include "mrflearn/errors.hpp"
#include "mrflearn/gibbs.hpp"

namespace mrflearn {

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kParity: return "parity";
    case BasisKind::kConjunction: return "conjunction";
    case BasisKind::kLocal: return "local";
    case BasisKind::kCustom: return "custom";
  }
  return "custom";
}

double BasisFunction::operator()(std::span<const std::int8_t> x) const {
  switch (kind) {
    case BasisKind::kParity: {
      int s = 1;
      for (int i : sites) s *= x[i];
      return s;
    }
    case BasisKind::kConjunction: {
      for (std::size_t k = 0; k < sites.size(); ++k) {
        if (x[sites[k]] != pattern[k]) return -1.0;
      }
      return 1.0;
    }
    case BasisKind::kLocal: {
      double v = scale;
      for (std::size_t k = 0; k < sites.size(); ++k) {
        v *= (x[sites[k]] == pattern[k] ? 1.0 : 0.0) - centers[k];
      }
      return std::clamp(v, -1.0, 1.0);
    }
    case BasisKind::kCustom: return (*custom)(x);
  }
  return 0.0;
}

namespace {

// Subsets of {0..n-1} with sizes in [lo, hi], by size then lexicographically.
template <typename Visit>
void for_each_subset(std::size_t n, std::size_t lo, std::size_t hi, Visit&& visit) {
  std::vector<int> s;
  for (std::size_t size = lo; size <= std::min(hi, n); ++size) {
    s.resize(size);
    for (std::size_t i = 0; i < size; ++i) s[i] = static_cast<int>(i);
    for (;;) {
      visit(s);
      std::ptrdiff_t i = static_cast<std::ptrdiff_t>(size) - 1;
      while (i >= 0 && s[i] == static_cast<int>(n - size + i)) --i;
      if (i < 0) break;
      ++s[i];
      for (std::size_t j = i + 1; j < size; ++j) s[j] = s[j - 1] + 1;
    }
  }
}

std::string set_text(const std::vector<int>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "}";
}

}  // namespace

BasisFamily parity_family(std::size_t n, std::size_t k) {
  BasisFamily family{BasisKind::kParity, {}};
  for_each_subset(n, 0, k, [&](const std::vector<int>& s) {
    BasisFunction g;
    g.name = "chi" + set_text(s);
    g.kind = BasisKind::kParity;
    g.sites = s;
    family.functions.push_back(std::move(g));
  });
  return family;
}

BasisFamily conjunction_family(std::size_t n, std::size_t k) {
  BasisFamily family{BasisKind::kConjunction, {}};
  for_each_subset(n, 1, k, [&](const std::vector<int>& s) {
    const std::size_t patterns = std::size_t{1} << s.size();
    for (std::size_t bits = 0; bits < patterns; ++bits) {
      BasisFunction g;
      g.kind = BasisKind::kConjunction;
      g.sites = s;
      g.name = "and{";
      for (std::size_t i = 0; i < s.size(); ++i) {
        const bool plus = (bits >> (s.size() - 1 - i)) & 1;
        g.pattern.push_back(plus ? 1 : -1);
        if (i) g.name += ',';
        g.name += std::to_string(s[i]) + (plus ? ":+" : ":-");
      }
      g.name += '}';
      family.functions.push_back(std::move(g));
    }
  });
  return family;
}

BasisFamily local_indicator_family(const MrfModel& model, std::size_t k,
                                   const LocalIndicatorOptions& options) {
  BasisFamily family{BasisKind::kLocal, {}};
  if (k == 0) return family;
  const std::size_t n = num_sites(model);
  const std::size_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  auto symbol = [&](std::size_t digit) {
    return static_cast<std::int8_t>(spins ? (digit == 1 ? 1 : -1) : static_cast<int>(digit));
  };

  // Weighted sample of the distribution: exact pi or stationary draws.
  std::vector<std::int8_t> states;
  std::vector<double> weights;
  bool exact = false;
  const std::uint64_t space = code_space_size(model);
  if (space != 0 && space <= options.state_cap) {
    const auto support = enumerate_support(model, options.state_cap);
    weights = stationary_exact(*support);
    for (std::size_t s = 0; s < support->size(); ++s) {
      const auto v = support->values(s);
      states.insert(states.end(), v.begin(), v.end());
    }
    exact = true;
  } else {
    RngStream rng(options.seed, {0x6C6F63616CULL});
    const ChainOracle oracle(model);
    for (const auto& x : sample_stationary_iid(oracle, default_burn_in(n), options.sample_count, rng)) {
      states.insert(states.end(), x.values.begin(), x.values.end());
    }
    weights.assign(options.sample_count, 1.0 / static_cast<double>(options.sample_count));
  }
  const std::size_t count = weights.size();
  std::vector<double> freq(n * a, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::int8_t v = states[s * n + i];
      const std::size_t digit = spins ? (v > 0 ? 1 : 0) : static_cast<std::size_t>(v);
      freq[i * a + digit] += weights[s];
    }
  }

  for_each_subset(n, 1, k, [&](const std::vector<int>& s) {
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < s.size(); ++i) patterns *= a;
    for (std::size_t p = 0; p < patterns; ++p) {
      BasisFunction g;
      g.kind = BasisKind::kLocal;
      g.sites = s;
      g.name = "ind{";
      std::size_t rest = p;
      std::vector<std::size_t> digits(s.size());
      for (std::size_t i = s.size(); i-- > 0;) {
        digits[i] = rest % a;
        rest /= a;
      }
      for (std::size_t i = 0; i < s.size(); ++i) {
        g.pattern.push_back(symbol(digits[i]));
        g.centers.push_back(freq[s[i] * a + digits[i]]);
        if (i) g.name += ',';
        g.name += std::to_string(s[i]) + ":" + std::to_string(static_cast<int>(symbol(digits[i])));
      }
      g.name += '}';
      double peak = 0.0;
      for (std::size_t st = 0; st < count; ++st) {
        double v = 1.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          v *= (states[st * n + s[i]] == g.pattern[i] ? 1.0 : 0.0) - g.centers[i];
        }
        peak = std::max(peak, std::fabs(v));
      }
      if (!exact) peak *= 1.1;
      g.scale = peak > 0.0 ? 1.0 / peak : 1.0;
      family.functions.push_back(std::move(g));
    }
  });
  return family;
}

BasisFunction custom_basis_function(std::string name, BasisEvaluator fn) {
  BasisFunction g;
  g.name = std::move(name);
  g.kind = BasisKind::kCustom;
  g.custom = std::make_shared<const BasisEvaluator>(std::move(fn));
  return g;
}

DenseMatrix tabulate(const BasisFamily& family, const SupportIndex& support) {
  DenseMatrix out(family.size(), support.size());
  for (std::size_t m = 0; m < family.size(); ++m) {
    for (std::size_t s = 0; s < support.size(); ++s) out(m, s) = family[m](support.values(s));
  }
  return out;
}

}  // namespace mrflearn
