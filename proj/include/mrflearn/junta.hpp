// Exact junta learning from a labeled random walk, and the chain conditions
// under which it succeeds.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mrflearn/errors.hpp"
#include "mrflearn/gibbs.hpp"
#include "mrflearn/models.hpp"

namespace mrflearn {

struct JuntaHypothesis {
  std::vector<int> variables;  // J, ascending
  std::size_t alphabet = 2;
  bool spins = true;
  // Assignment over J (mixed-radix code, first variable most significant) -> label.
  std::map<std::uint64_t, std::int8_t> table;
  std::int8_t default_label = 1;
  // Every one of the |A|^|J| assignments was observed.
  bool complete = false;

  std::uint64_t assignment_code(std::span<const std::int8_t> x) const;
  int operator()(std::span<const std::int8_t> x) const;
  int operator()(const Configuration& x) const { return (*this)(std::span(x.values)); }
};

// Streaming form of the learner: feed the walk one state at a time. Memory
// is proportional to the number of distinct visited states.
class JuntaAccumulator {
 public:
  JuntaAccumulator(std::size_t n, std::size_t alphabet, bool spins);

  // changed_site: the coordinate that differs from the previous state, or -1
  // if the state is unchanged. Ignored for the first state.
  void observe(const Configuration& x, int label, int changed_site) {
    // Self-loops with an unchanged label only extend the current run.
    if (changed_site < 0 && steps_ > 0 && label == prev_label_) {
      ++steps_;
      ++run_;
      return;
    }
    observe_transition(x, label, changed_site);
  }
  // Same as `count` calls of observe(x, same label, -1) after the first state.
  void hold(std::size_t count) {
    if (steps_ == 0) throw InputError("junta learner: hold before the first observation");
    steps_ += count;
    run_ += count;
  }
  // Validating form: derives the changed site and rejects transitions that
  // change more than one coordinate, or the label without any coordinate.
  void observe(const Configuration& x, int label);

  std::size_t steps() const { return steps_; }
  const std::vector<char>& relevant() const { return relevant_; }

  JuntaHypothesis finish(int default_label = 1);

 private:
  void flush();
  void observe_transition(const Configuration& x, int label, int changed_site);

  std::size_t n_;
  std::size_t alphabet_;
  bool spins_;
  std::size_t steps_ = 0;
  std::vector<char> relevant_;
  Configuration prev_;
  int prev_label_ = 0;
  std::size_t run_ = 0;
  std::uint64_t code_ = 0;
  // State code -> (visits labeled +1, visits labeled -1). Dense when |A|^n is small.
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 22;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> dense_;
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> visits_;
  std::vector<std::uint64_t> place_;
};

// Fig.-3 learner: J = coordinates whose single-site change co-occurred with
// a label change; h = plurality label per assignment over J (ties to +1).
JuntaHypothesis junta_learn(const LabeledWalk& walk, std::size_t alphabet_size,
                            int default_label = 1);

struct JuntaConditions {
  std::size_t max_set = 0;
  // min over |S| <= max_set and b with pi(x_S = b) > 0 of pi(x_S = b) |A|^|S|.
  double min_mass_ratio = 0.0;
  // Smallest c with pi(x_S = b) >= 1 / (c |A|)^|S| on all those events.
  double c = 0.0;
  // Smallest transition probability between distinct support states at
  // Hamming distance one.
  double beta = 0.0;
};

JuntaConditions verify_junta_conditions(const MrfModel& model, std::size_t max_set);

// Walk length 2 tau ln(1/alpha) ln(k/delta) / alpha with alpha = beta / (c |A|)^k.
std::size_t junta_walk_length(const JuntaConditions& cond, std::size_t alphabet, std::size_t k,
                              double delta, std::size_t mixing_time);

}  // namespace mrflearn
