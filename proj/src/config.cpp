#include "mrflearn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mrflearn/errors.hpp"
#include "mrflearn/io.hpp"

namespace mrflearn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": expected a number, got '" + s + "'");
}

long long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": expected an integer, got '" + s + "'");
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema{
      {"run", {"seed", "out", "cache", "workers", "cap_states"}},
      {"model", {"file", "kind", "graph", "n", "rows", "cols", "p", "graph_seed", "beta", "field", "q"}},
      {"spectrum", {"betas"}},
      {"majority", {"graph", "n", "p", "betas", "degrees", "policy", "graph_seeds"}},
      {"learn",
       {"basis_degree", "tau_max", "T", "epsilon2", "delta", "train", "validation", "budgets", "seeds",
        "scheme", "time_grid", "opt_junta"}},
      {"junta", {"k", "delta", "trials", "walk_length"}},
      {"noise", {"target", "halfspace_seed", "times", "method", "pairs", "rhos"}},
      {"sample", {"count", "burn_in", "exact", "walk_length"}},
      {"verify", {"functions"}},
  };
  return schema;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!config_schema().contains(section)) throw InputError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected key = value");
    if (section.empty()) throw InputError(where + ": key outside any section");
    try {
      cfg.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::set(const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw InputError("override '" + dotted + "' must look like section.key");
  set(dotted.substr(0, dot), dotted.substr(dot + 1), value);
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const auto it = config_schema().find(section);
  if (it == config_schema().end()) throw InputError("unknown section '" + section + "'");
  if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
    throw InputError("unknown key '" + key + "' in section [" + section + "]");
  }
  values_[section][key] = value;
}

void RunConfig::apply_environment(const std::function<const char*(const char*)>& getenv_fn) {
  for (const auto& [section, keys] : config_schema()) {
    for (const auto& key : keys) {
      const std::string name = "MRFLEARN_" + upper(section) + "_" + upper(key);
      if (const char* v = getenv_fn(name.c_str())) set(section, key, v);
    }
  }
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section);
  return it != values_.end() && it->second.contains(key);
}

std::string RunConfig::get(const std::string& section, const std::string& key, const std::string& fallback) const {
  return has(section, key) ? values_.at(section).at(key) : fallback;
}

double RunConfig::get_double(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? parse_double(get(section, key, ""), section + "." + key) : fallback;
}

long long RunConfig::get_int(const std::string& section, const std::string& key, long long fallback) const {
  return has(section, key) ? parse_int(get(section, key, ""), section + "." + key) : fallback;
}

std::size_t RunConfig::get_size(const std::string& section, const std::string& key, std::size_t fallback) const {
  if (!has(section, key)) return fallback;
  const long long v = get_int(section, key, 0);
  if (v < 0) throw InputError(section + "." + key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool RunConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw InputError(section + "." + key + ": expected true or false");
}

std::vector<double> RunConfig::get_doubles(const std::string& section, const std::string& key,
                                           std::vector<double> fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(get(section, key, ""))) out.push_back(parse_double(s, section + "." + key));
  return out;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string& section, const std::string& key,
                                              std::vector<std::size_t> fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<std::size_t> out;
  for (const auto& s : split_list(get(section, key, ""))) {
    const long long v = parse_int(s, section + "." + key);
    if (v < 0) throw InputError(section + "." + key + ": entries must be nonnegative");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  for (const auto& [section, kv] : values_) {
    out << '[' << section << "]\n";
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  }
  return out.str();
}

MrfModel build_model(const RunConfig& config) {
  if (config.has("model", "file")) return read_model_file(config.get("model", "file", ""));
  GraphParams params;
  params.n = config.get_size("model", "n", 0);
  params.rows = config.get_size("model", "rows", 0);
  params.cols = config.get_size("model", "cols", 0);
  params.p = config.get_double("model", "p", 0.0);
  const GraphKind kind = parse_graph_kind(config.get("model", "graph", "cycle"));
  Graph graph = make_graph(kind, params, static_cast<std::uint64_t>(config.get_int("model", "graph_seed", 0)));
  const std::string model_kind = config.get("model", "kind", "ising");
  if (model_kind == "ising") {
    return IsingModel::uniform(std::move(graph), config.get_double("model", "beta", 0.0),
                               config.get_double("model", "field", 0.0));
  }
  if (model_kind == "coloring") {
    const long long q = config.get_int("model", "q", 0);
    if (q < 1 || q > 36) throw InputError("model.q must lie in 1..36");
    return ColoringModel(std::move(graph), static_cast<int>(q));
  }
  throw InputError("model.kind must be ising or coloring");
}

}  // namespace mrflearn
