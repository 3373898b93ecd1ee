#include "mrflearn/junta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrflearn/errors.hpp"
#include "mrflearn/support.hpp"

namespace mrflearn {
namespace {

std::uint64_t digit(std::int8_t v, bool spins) {
  return spins ? (v > 0 ? 1 : 0) : static_cast<std::uint64_t>(v);
}

}  // namespace

std::uint64_t JuntaHypothesis::assignment_code(std::span<const std::int8_t> x) const {
  std::uint64_t code = 0;
  for (int j : variables) code = code * alphabet + digit(x[j], spins);
  return code;
}

int JuntaHypothesis::operator()(std::span<const std::int8_t> x) const {
  const auto it = table.find(assignment_code(x));
  return it == table.end() ? default_label : it->second;
}

JuntaAccumulator::JuntaAccumulator(std::size_t n, std::size_t alphabet, bool spins)
    : n_(n), alphabet_(alphabet), spins_(spins), relevant_(n, 0), place_(n) {
  std::uint64_t w = 1;
  bool overflow = false;
  for (std::size_t i = n; i-- > 0;) {
    if (overflow) throw SizeCapError("junta learner: |A|^n does not fit in 64 bits");
    place_[i] = w;
    if (w > std::numeric_limits<std::uint64_t>::max() / alphabet) overflow = true;
    else w *= alphabet;
  }
  if (!overflow && w <= kDenseLimit) dense_.assign(w, {0, 0});
}

void JuntaAccumulator::flush() {
  if (run_ == 0) return;
  auto& cell = dense_.empty() ? visits_[code_] : dense_[code_];
  (prev_label_ > 0 ? cell.first : cell.second) += run_;
  run_ = 0;
}

void JuntaAccumulator::observe_transition(const Configuration& x, int label, int changed_site) {
  if (label != 1 && label != -1) throw InputError("junta learner: labels must be +1 or -1");
  if (steps_ == 0) {
    if (x.size() != n_) throw InputError("junta learner: state length mismatch");
    prev_ = x;
    code_ = 0;
    for (std::size_t i = 0; i < n_; ++i) code_ += digit(x[i], spins_) * place_[i];
    prev_label_ = label;
    run_ = 1;
    steps_ = 1;
    return;
  }
  if (changed_site < 0 && label == prev_label_) {
    ++steps_;
    ++run_;
    return;
  }
  if (changed_site < 0) {
    throw InputError("junta learner: label changed at step " + std::to_string(steps_) +
                     " without any coordinate change");
  }
  ++steps_;
  flush();
  if (label != prev_label_) relevant_[changed_site] = 1;
  code_ += (digit(x[changed_site], spins_) - digit(prev_[changed_site], spins_)) * place_[changed_site];
  prev_[changed_site] = x[changed_site];
  prev_label_ = label;
  run_ = 1;
}

void JuntaAccumulator::observe(const Configuration& x, int label) {
  if (steps_ == 0) {
    observe(x, label, -1);
    return;
  }
  if (x.size() != n_) throw InputError("junta learner: state length mismatch");
  int changed = -1;
  for (std::size_t i = 0; i < n_; ++i) {
    if (x[i] == prev_[i]) continue;
    if (changed >= 0) {
      throw InputError("junta learner: states at steps " + std::to_string(steps_ - 1) + " and " +
                       std::to_string(steps_) + " differ in more than one coordinate");
    }
    changed = static_cast<int>(i);
  }
  observe(x, label, changed);
}

JuntaHypothesis JuntaAccumulator::finish(int default_label) {
  flush();
  JuntaHypothesis h;
  h.alphabet = alphabet_;
  h.spins = spins_;
  h.default_label = static_cast<std::int8_t>(default_label >= 0 ? 1 : -1);
  for (std::size_t i = 0; i < n_; ++i) {
    if (relevant_[i]) h.variables.push_back(static_cast<int>(i));
  }
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> votes;
  std::vector<std::int8_t> x(n_);
  auto visited = visits_;
  for (std::uint64_t code = 0; code < dense_.size(); ++code) {
    if (dense_[code].first + dense_[code].second > 0) visited.emplace(code, dense_[code]);
  }
  for (const auto& [code, cell] : visited) {
    std::uint64_t rest = code;
    for (std::size_t i = n_; i-- > 0;) {
      const auto d = static_cast<std::int8_t>(rest % alphabet_);
      rest /= alphabet_;
      x[i] = spins_ ? static_cast<std::int8_t>(d == 1 ? 1 : -1) : d;
    }
    auto& v = votes[h.assignment_code(x)];
    v.first += cell.first;
    v.second += cell.second;
  }
  for (const auto& [key, v] : votes) h.table[key] = v.first >= v.second ? 1 : -1;
  double cells = 1.0;
  for (std::size_t j = 0; j < h.variables.size(); ++j) cells *= static_cast<double>(alphabet_);
  h.complete = static_cast<double>(h.table.size()) == cells;
  return h;
}

JuntaHypothesis junta_learn(const LabeledWalk& walk, std::size_t alphabet_size, int default_label) {
  validate_walk(walk);
  if (walk.states.empty()) {
    JuntaHypothesis h;
    h.alphabet = alphabet_size;
    h.default_label = static_cast<std::int8_t>(default_label >= 0 ? 1 : -1);
    return h;
  }
  bool spins = alphabet_size == 2;
  for (const auto& x : walk.states) {
    for (auto v : x.values) {
      if (v == -1) {
        spins = true;
      } else if (v < 0 || static_cast<std::size_t>(v) >= alphabet_size) {
        throw InputError("junta learner: state value outside the alphabet");
      }
    }
  }
  if (spins) {
    for (const auto& x : walk.states) {
      for (auto v : x.values) {
        if (v != 1 && v != -1) throw InputError("junta learner: mixed spin and color values");
      }
    }
  }
  JuntaAccumulator acc(walk.states.front().size(), alphabet_size, spins);
  for (std::size_t i = 0; i < walk.states.size(); ++i) acc.observe(walk.states[i], walk.labels[i]);
  return acc.finish(default_label);
}

JuntaConditions verify_junta_conditions(const MrfModel& model, std::size_t max_set) {
  const auto support = enumerate_support(model);
  const auto pi = stationary_exact(*support);
  const std::size_t n = support->num_sites();
  const std::size_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  JuntaConditions out;
  out.max_set = max_set;
  out.min_mass_ratio = std::numeric_limits<double>::infinity();
  out.c = 0.0;

  std::vector<int> s;
  std::vector<double> marg;
  for (std::size_t size = 1; size <= std::min(max_set, n); ++size) {
    s.resize(size);
    for (std::size_t i = 0; i < size; ++i) s[i] = static_cast<int>(i);
    std::size_t cells = 1;
    for (std::size_t i = 0; i < size; ++i) cells *= a;
    for (;;) {
      marg.assign(cells, 0.0);
      for (std::size_t k = 0; k < support->size(); ++k) {
        const auto x = support->values(k);
        std::size_t key = 0;
        for (int j : s) key = key * a + digit(x[j], spins);
        marg[key] += pi[k];
      }
      for (double m : marg) {
        if (m <= 0.0) continue;
        out.min_mass_ratio = std::min(out.min_mass_ratio, m * static_cast<double>(cells));
        out.c = std::max(out.c, std::pow(m, -1.0 / static_cast<double>(size)) / static_cast<double>(a));
      }
      std::ptrdiff_t i = static_cast<std::ptrdiff_t>(size) - 1;
      while (i >= 0 && s[i] == static_cast<int>(n - size + i)) --i;
      if (i < 0) break;
      ++s[i];
      for (std::size_t j = i + 1; j < size; ++j) s[j] = s[j - 1] + 1;
    }
  }
  out.beta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < support->size(); ++k) {
    const TransitionRow row = transition_row(model, support->state(k));
    for (const SiteMove& mv : row.moves) out.beta = std::min(out.beta, mv.probability);
  }
  if (!std::isfinite(out.beta)) out.beta = 0.0;
  if (!std::isfinite(out.min_mass_ratio)) out.min_mass_ratio = 1.0;
  return out;
}

std::size_t junta_walk_length(const JuntaConditions& cond, std::size_t alphabet, std::size_t k,
                              double delta, std::size_t mixing_time) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("junta walk length: delta must lie in (0, 1)");
  if (k == 0) return 1;
  if (!(cond.beta > 0.0)) throw InputError("junta walk length: transition floor beta must be positive");
  const double alpha = cond.beta / std::pow(std::max(cond.c, 1e-300) * static_cast<double>(alphabet),
                                            static_cast<double>(k));
  const double len = 2.0 * static_cast<double>(mixing_time) * std::log(1.0 / alpha) *
                     std::log(static_cast<double>(k) / delta) / alpha;
  return static_cast<std::size_t>(std::ceil(len));
}

}  // namespace mrflearn
