#include "mrflearn/gibbs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <numeric>

#include "mrflearn/errors.hpp"

namespace mrflearn {
namespace {

int nth_set_bit(std::uint64_t mask, std::uint64_t k) {
  for (std::uint64_t i = 0; i < k; ++i) mask &= mask - 1;
  return std::countr_zero(mask);
}

int ising_resample(const IsingModel& model, Configuration& x, std::size_t i, RngStream& rng) {
  if (rng.uniform() < ising_flip_probability(model, x, i)) {
    x[i] = static_cast<std::int8_t>(-x[i]);
    return static_cast<int>(i);
  }
  return -1;
}

int coloring_resample(const ColoringModel& model, Configuration& c, std::size_t i, RngStream& rng) {
  const std::uint64_t free = model.free_colors(c, i);
  const int count = std::popcount(free);
  const int color = nth_set_bit(free, rng.below(static_cast<std::uint64_t>(count)));
  if (color == c[i]) return -1;
  c[i] = static_cast<std::int8_t>(color);
  return static_cast<int>(i);
}

template <class Resample>
int lazy_step(std::size_t n, RngStream& rng, Resample resample) {
  const std::uint64_t r = rng.below(2 * n);
  if (r & 1) return -1;
  return resample(r >> 1);
}

}  // namespace

ChainOracle::ChainOracle(MrfModel model)
    : model_(std::make_shared<const MrfModel>(std::move(model))),
      n_(mrflearn::num_sites(*model_)),
      alphabet_(mrflearn::alphabet_size(*model_)) {
  if (n_ == 0) throw InputError("chain oracle needs at least one site");
  adj_offsets_.push_back(0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (int j : graph_of(*model_).neighbors(i)) adj_.push_back(j);
    adj_offsets_.push_back(static_cast<int>(adj_.size()));
  }
  if (const auto* ising = std::get_if<IsingModel>(model_.get());
      ising != nullptr && ising->uniform_coupling()) {
    const double beta = ising->beta().empty() ? 0.0 : ising->beta().front();
    max_degree_ = static_cast<int>(ising->graph().max_degree());
    table_width_ = 2 * max_degree_ + 1;
    flip_table_.resize(2 * static_cast<std::size_t>(table_width_));
    for (int spin = 0; spin < 2; ++spin) {
      const double s = spin == 1 ? 1.0 : -1.0;
      for (int sum = -max_degree_; sum <= max_degree_; ++sum) {
        const double h = ising->field() + beta * sum;
        flip_table_[spin * table_width_ + sum + max_degree_] = heat_bath_probability(2.0 * s * h);
      }
    }
  }
  if (const auto* coloring = std::get_if<ColoringModel>(model_.get()); coloring && coloring->q() <= 8) {
    full_mask_ = (std::uint64_t{1} << coloring->q()) - 1;
    nth_color_.resize(std::size_t{8} << coloring->q());
    for (std::size_t mask = 0; mask < (std::size_t{1} << coloring->q()); ++mask) {
      std::size_t k = 0;
      for (int b = 0; b < 8; ++b)
        if ((mask >> b) & 1) nth_color_[mask * 8 + k++] = static_cast<std::int8_t>(b);
    }
  }
}

int ChainOracle::advance_general(Configuration& x, RngStream& rng) const {
  return lazy_step(n_, rng, [&](std::size_t i) {
    if (const auto* ising = std::get_if<IsingModel>(model_.get())) return ising_resample(*ising, x, i, rng);
    return coloring_resample(std::get<ColoringModel>(*model_), x, i, rng);
  });
}

int ChainOracle::resample_general(Configuration& x, RngStream& rng) const {
  const std::size_t i = rng.below(n_);
  if (const auto* ising = std::get_if<IsingModel>(model_.get())) return ising_resample(*ising, x, i, rng);
  return coloring_resample(std::get<ColoringModel>(*model_), x, i, rng);
}

Configuration ChainOracle::step(const Configuration& x, RngStream& rng) const {
  Configuration y = x;
  advance(y, rng);
  return y;
}

ChainOracle one_step_oracle(const MrfModel& model) { return ChainOracle(model); }

Configuration glauber_step(const IsingModel& model, const Configuration& x, RngStream& rng) {
  check_shape(model, x);
  Configuration y = x;
  lazy_step(model.num_sites(), rng, [&](std::size_t i) { return ising_resample(model, y, i, rng); });
  return y;
}

Configuration coloring_step(const ColoringModel& model, const Configuration& c,
                            RngStream& rng) {
  if (!is_valid_coloring(model, c)) throw InputError("coloring_step: input is not a proper coloring");
  Configuration y = c;
  lazy_step(model.num_sites(), rng, [&](std::size_t i) { return coloring_resample(model, y, i, rng); });
  return y;
}

Configuration simulate_t_steps(const ChainOracle& oracle, Configuration x, std::size_t t,
                               RngStream& rng) {
  oracle.run(x, t, rng);
  return x;
}

std::size_t default_burn_in(std::size_t n) {
  const double m = static_cast<double>(std::max<std::size_t>(n, 2));
  return static_cast<std::size_t>(std::ceil(10.0 * static_cast<double>(n) * std::log(m)));
}

Configuration greedy_initial_coloring(const ColoringModel& model) {
  const std::size_t n = model.num_sites();
  auto c = Configuration(std::vector<std::int8_t>(n, -1));
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t used = 0;
    for (int j : model.graph().neighbors(i)) {
      if (c[j] >= 0) used |= std::uint64_t{1} << c[j];
    }
    int color = 0;
    while (color < model.q() && (used >> color & 1)) ++color;
    if (color == model.q()) {
      throw InputError("greedy coloring failed at node " + std::to_string(i) + " with q=" +
                       std::to_string(model.q()));
    }
    c[i] = static_cast<std::int8_t>(color);
  }
  return c;
}

std::vector<Configuration> sample_stationary_iid(const ChainOracle& oracle, std::size_t burn_in,
                                                 std::size_t count, RngStream& rng) {
  std::vector<Configuration> out;
  out.reserve(count);
  const MrfModel& model = oracle.model();
  const std::size_t n = oracle.num_sites();
  std::optional<Configuration> greedy;
  if (const auto* coloring = std::get_if<ColoringModel>(&model)) {
    greedy = greedy_initial_coloring(*coloring);
  }
  for (std::size_t s = 0; s < count; ++s) {
    Configuration x;
    if (greedy) {
      std::vector<std::int8_t> perm(oracle.alphabet_size());
      std::iota(perm.begin(), perm.end(), std::int8_t{0});
      for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
      x = *greedy;
      for (auto& v : x.values) v = perm[static_cast<std::size_t>(v)];
    } else {
      x.values.resize(n);
      for (auto& v : x.values) v = rng.coin() ? 1 : -1;
    }
    oracle.run(x, burn_in, rng);
    out.push_back(std::move(x));
  }
  return out;
}

LabeledWalk labeled_walk(const ChainOracle& oracle, const LabelFunction& label,
                         const Configuration& start, std::size_t length, RngStream& rng) {
  LabeledWalk walk;
  if (length == 0) return walk;
  walk.states.reserve(length);
  walk.labels.reserve(length);
  Configuration x = start;
  for (std::size_t k = 0; k < length; ++k) {
    if (k > 0) oracle.advance(x, rng);
    walk.states.push_back(x);
    walk.labels.push_back(static_cast<std::int8_t>(label(x)));
  }
  return walk;
}

void validate_walk(const LabeledWalk& walk) {
  if (walk.states.size() != walk.labels.size()) {
    throw InputError("walk has " + std::to_string(walk.states.size()) + " states but " +
                     std::to_string(walk.labels.size()) + " labels");
  }
  for (std::size_t k = 1; k < walk.states.size(); ++k) {
    if (hamming_distance(walk.states[k - 1], walk.states[k]) > 1) {
      throw InputError("walk step " + std::to_string(k) + " changes more than one coordinate");
    }
  }
}

TransitionRow transition_row(const MrfModel& model, const Configuration& x) {
  const std::size_t n = num_sites(model);
  const double select = 0.5 / static_cast<double>(n);
  TransitionRow row;
  row.stay = 0.5;
  if (const auto* ising = std::get_if<IsingModel>(&model)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double flip = ising_flip_probability(*ising, x, i);
      row.stay += select * (1.0 - flip);
      if (flip > 0.0) {
        row.moves.push_back({static_cast<std::uint32_t>(i), static_cast<std::int8_t>(-x[i]),
                             select * flip});
      }
    }
    return row;
  }
  const auto& coloring = std::get<ColoringModel>(model);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t free = coloring.free_colors(x, i);
    if (!(free >> x[i] & 1)) throw InputError("transition_row: configuration is not a proper coloring");
    const int count = std::popcount(free);
    const double p = select / count;
    row.stay += p;
    for (std::uint64_t m = free; m != 0; m &= m - 1) {
      const int color = std::countr_zero(m);
      if (color != x[i]) {
        row.moves.push_back({static_cast<std::uint32_t>(i), static_cast<std::int8_t>(color), p});
      }
    }
  }
  return row;
}

}  // namespace mrflearn
