#include "mrflearn/models.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "mrflearn/errors.hpp"

namespace mrflearn {

IsingModel::IsingModel(Graph graph, std::vector<double> beta, double field)
    : graph_(std::move(graph)), beta_(std::move(beta)), field_(field) {
  if (beta_.size() != graph_.num_edges()) {
    throw InputError("ising: expected " + std::to_string(graph_.num_edges()) +
                     " couplings, got " + std::to_string(beta_.size()));
  }
  for (double b : beta_) {
    if (!std::isfinite(b)) throw InputError("ising: non-finite coupling");
  }
  if (!std::isfinite(field_)) throw InputError("ising: non-finite external field");
  for (double b : beta_) uniform_ = uniform_ && b == beta_.front();
}

IsingModel IsingModel::uniform(Graph graph, double beta, double field) {
  std::vector<double> couplings(graph.num_edges(), beta);
  return IsingModel(std::move(graph), std::move(couplings), field);
}

double IsingModel::local_field(const Configuration& x, std::size_t i) const {
  const auto nb = graph_.neighbors(i);
  const auto ids = graph_.incident_edges(i);
  double h = field_;
  for (std::size_t k = 0; k < nb.size(); ++k) h += beta_[ids[k]] * x[nb[k]];
  return h;
}

ColoringModel::ColoringModel(Graph graph, int q) : graph_(std::move(graph)), q_(q) {
  if (q < 1) throw InputError("coloring: q must be >= 1");
  if (q > 64) throw InputError("coloring: q > 64 is not supported");
}

bool ColoringModel::rapid_mixing_guaranteed() const {
  return static_cast<std::size_t>(q_) >= 3 * graph_.max_degree();
}

std::uint64_t ColoringModel::free_colors(const Configuration& c, std::size_t i) const {
  std::uint64_t used = 0;
  for (int j : graph_.neighbors(i)) used |= std::uint64_t{1} << c[j];
  const std::uint64_t all = q_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << q_) - 1;
  return all & ~used;
}

std::size_t num_sites(const MrfModel& model) {
  return std::visit([](const auto& m) { return m.num_sites(); }, model);
}

std::size_t alphabet_size(const MrfModel& model) {
  if (const auto* c = std::get_if<ColoringModel>(&model)) return static_cast<std::size_t>(c->q());
  return 2;
}

const Graph& graph_of(const MrfModel& model) {
  return std::visit([](const auto& m) -> const Graph& { return m.graph(); }, model);
}

bool is_ising(const MrfModel& model) { return std::holds_alternative<IsingModel>(model); }

void check_shape(const MrfModel& model, const Configuration& x) {
  const std::size_t n = num_sites(model);
  if (x.size() != n) {
    throw InputError("configuration length " + std::to_string(x.size()) + " != model size " +
                     std::to_string(n));
  }
  if (is_ising(model)) {
    for (auto v : x.values) {
      if (v != 1 && v != -1) throw InputError("ising configuration entries must be -1 or +1");
    }
  } else {
    const int q = std::get<ColoringModel>(model).q();
    for (auto v : x.values) {
      if (v < 0 || v >= q) throw InputError("color out of range [0, q)");
    }
  }
}

double hamiltonian(const IsingModel& model, const Configuration& sigma) {
  check_shape(model, sigma);
  const auto edges = model.graph().edges();
  const auto beta = model.beta();
  double h = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    h -= beta[k] * sigma[edges[k].u] * sigma[edges[k].v];
  }
  double m = 0.0;
  for (auto s : sigma.values) m += s;
  return h - model.field() * m;
}

bool is_valid_coloring(const ColoringModel& model, const Configuration& c) {
  if (c.size() != model.num_sites()) return false;
  for (auto v : c.values) {
    if (v < 0 || v >= model.q()) return false;
  }
  for (const Edge& e : model.graph().edges()) {
    if (c[e.u] == c[e.v]) return false;
  }
  return true;
}

double log_stationary_weight(const MrfModel& model, const Configuration& x) {
  check_shape(model, x);
  if (const auto* ising = std::get_if<IsingModel>(&model)) return -hamiltonian(*ising, x);
  return is_valid_coloring(std::get<ColoringModel>(model), x)
             ? 0.0
             : -std::numeric_limits<double>::infinity();
}

std::size_t hamming_distance(const Configuration& x, const Configuration& y) {
  if (x.size() != y.size()) throw InputError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
  return d;
}

std::uint64_t code_space_size(const MrfModel& model) {
  const std::uint64_t a = alphabet_size(model);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < num_sites(model); ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / a) return 0;
    total *= a;
  }
  return total;
}

std::uint64_t encode(const MrfModel& model, const Configuration& x) {
  const std::uint64_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  std::uint64_t code = 0;
  for (auto v : x.values) {
    const std::uint64_t digit = spins ? (v > 0 ? 1 : 0) : static_cast<std::uint64_t>(v);
    code = code * a + digit;
  }
  return code;
}

Configuration decode(const MrfModel& model, std::uint64_t code) {
  const std::uint64_t a = alphabet_size(model);
  const bool spins = is_ising(model);
  const std::size_t n = num_sites(model);
  auto x = Configuration(std::vector<std::int8_t>(n));
  for (std::size_t k = n; k-- > 0;) {
    const auto digit = static_cast<std::int8_t>(code % a);
    code /= a;
    x[k] = spins ? static_cast<std::int8_t>(digit == 1 ? 1 : -1) : digit;
  }
  return x;
}

double heat_bath_probability(double delta_energy) {
  if (delta_energy > 0.0) {
    const double e = std::exp(-delta_energy);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(delta_energy));
}

double ising_flip_probability(const IsingModel& model, const Configuration& x, std::size_t i) {
  // Flipping s_i changes H by 2 s_i h_i.
  return heat_bath_probability(2.0 * x[i] * model.local_field(x, i));
}

std::string describe(const MrfModel& model) {
  std::ostringstream out;
  out.precision(17);
  const Graph& g = graph_of(model);
  if (const auto* ising = std::get_if<IsingModel>(&model)) {
    out << g.num_nodes() << ' ' << g.num_edges() << " ising\n";
    for (std::size_t k = 0; k < g.num_edges(); ++k) {
      out << g.edges()[k].u << ' ' << g.edges()[k].v << ' ' << ising->beta()[k] << '\n';
    }
    out << "B " << ising->field() << '\n';
  } else {
    out << g.num_nodes() << ' ' << g.num_edges() << ' ' << std::get<ColoringModel>(model).q()
        << '\n';
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  }
  return out.str();
}

}  // namespace mrflearn
