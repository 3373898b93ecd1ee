#include "mrflearn/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mrflearn/errors.hpp"

namespace mrflearn {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("");
    return v;
  } catch (const std::exception&) {
    throw InputError("bad number '" + s + "' in " + what);
  }
}

long long to_integer(const std::string& s, const std::string& what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("bad integer '" + s + "' in " + what);
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string descriptor(const std::pair<std::size_t, std::size_t>& d) {
  return std::to_string(d.first) + ":" + std::to_string(d.second);
}

// Little-endian byte writer/reader for the cache.
class ByteSink {
 public:
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteSource {
 public:
  explicit ByteSource(const std::string& b) : b_(b) {}
  bool u64(std::uint64_t& v) {
    if (pos_ + 8 > b_.size()) return false;
    v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + k])) << (8 * k);
    }
    pos_ += 8;
    return true;
  }
  bool f64(double& v) {
    std::uint64_t u = 0;
    if (!u64(u)) return false;
    v = std::bit_cast<double>(u);
    return true;
  }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[8] = {'M', 'R', 'F', 'S', 'P', 'E', 'C', '1'};

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

MrfModel parse_model_text(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    lines.push_back(std::move(tok));
  }
  if (lines.empty() || lines[0].size() != 3) throw InputError("model text: header must be 'n m ising|q'");
  const long long n = to_integer(lines[0][0], "model header");
  const long long m = to_integer(lines[0][1], "model header");
  if (n < 1 || m < 0) throw InputError("model text: n must be >= 1 and m >= 0");
  const bool ising = lines[0][2] == "ising";
  const long long q = ising ? 0 : to_integer(lines[0][2], "model header");
  if (static_cast<long long>(lines.size()) < 1 + m) throw InputError("model text: fewer edge lines than m");
  std::vector<Edge> edges;
  std::vector<double> beta;
  for (long long k = 1; k <= m; ++k) {
    const auto& tok = lines[static_cast<std::size_t>(k)];
    if (tok.size() != (ising ? 3u : 2u) && !(ising && tok.size() == 2)) {
      throw InputError("model text: edge line " + std::to_string(k) + " is malformed");
    }
    edges.push_back({static_cast<int>(to_integer(tok[0], "edge line")),
                     static_cast<int>(to_integer(tok[1], "edge line"))});
    if (ising) beta.push_back(tok.size() == 3 ? to_double(tok[2], "edge line") : 0.0);
  }
  double field = 0.0;
  for (std::size_t k = static_cast<std::size_t>(m) + 1; k < lines.size(); ++k) {
    const auto& tok = lines[k];
    if (ising && tok.size() == 2 && tok[0] == "B") {
      field = to_double(tok[1], "field line");
    } else {
      throw InputError("model text: unexpected line after the edge list");
    }
  }
  Graph graph(static_cast<std::size_t>(n), std::move(edges));
  if (ising) return IsingModel(std::move(graph), std::move(beta), field);
  if (q < 1 || q > 36) throw InputError("model text: q must lie in 1..36");
  return ColoringModel(std::move(graph), static_cast<int>(q));
}

MrfModel read_model_file(const std::filesystem::path& path) { return parse_model_text(read_text(path)); }

void write_model_file(const std::filesystem::path& path, const MrfModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << describe(model);
}

std::string state_string(const MrfModel& model, const Configuration& x) {
  check_shape(model, x);
  std::string s(x.size(), '?');
  const bool ising = is_ising(model);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ising) {
      s[i] = x[i] > 0 ? '+' : '-';
    } else {
      s[i] = x[i] < 10 ? static_cast<char>('0' + x[i]) : static_cast<char>('a' + x[i] - 10);
    }
  }
  return s;
}

Configuration parse_state_string(const MrfModel& model, const std::string& s) {
  auto x = Configuration(std::vector<std::int8_t>(s.size(), 0));
  const bool ising = is_ising(model);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (ising) {
      if (c != '+' && c != '-') throw InputError("state string: expected '+' or '-'");
      x[i] = c == '+' ? 1 : -1;
    } else if (c >= '0' && c <= '9') {
      x[i] = static_cast<std::int8_t>(c - '0');
    } else if (c >= 'a' && c <= 'z') {
      x[i] = static_cast<std::int8_t>(c - 'a' + 10);
    } else {
      throw InputError("state string: bad color symbol");
    }
  }
  check_shape(model, x);
  return x;
}

void write_walk_csv(std::ostream& out, const MrfModel& model, const LabeledWalk& walk) {
  if (walk.states.size() != walk.labels.size()) throw InputError("walk: state and label counts differ");
  out << "step,state,label\n";
  for (std::size_t i = 0; i < walk.states.size(); ++i) {
    out << i << ',' << state_string(model, walk.states[i]) << ',' << static_cast<int>(walk.labels[i]) << '\n';
  }
}

LabeledWalk read_walk_csv(std::istream& in, const MrfModel& model) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "step,state,label") {
    throw InputError("walk csv: missing 'step,state,label' header");
  }
  LabeledWalk walk;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw InputError("walk csv: expected 3 fields");
    if (to_integer(f[0], "walk step") != static_cast<long long>(walk.states.size())) {
      throw InputError("walk csv: steps must be consecutive from 0");
    }
    walk.states.push_back(parse_state_string(model, f[1]));
    const long long label = to_integer(f[2], "walk label");
    if (label != 1 && label != -1) throw InputError("walk csv: labels must be +1 or -1");
    walk.labels.push_back(static_cast<std::int8_t>(label));
  }
  return walk;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t model_hash(const MrfModel& model) {
  const std::string text = describe(model) + "dynamics " + std::to_string(kDynamicsVersion);
  return fnv1a64(text.data(), text.size());
}

void write_spectrum_cache(const std::filesystem::path& path, const MrfModel& model, const Spectrum& spec) {
  const std::size_t s = spec.size();
  ByteSink sink;
  sink.raw(kMagic, sizeof kMagic);
  sink.u64(num_sites(model));
  sink.u64(s);
  sink.u64(model_hash(model));
  sink.u64(kDynamicsVersion);
  for (double v : spec.pi) sink.f64(v);
  for (double v : spec.eigenvalues) sink.f64(v);
  for (double v : spec.eigenvectors.data()) sink.f64(v);
  const std::uint64_t sum = fnv1a64(sink.bytes().data(), sink.bytes().size());
  sink.u64(sum);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write cache file '" + tmp + "'");
    out.write(sink.bytes().data(), static_cast<std::streamsize>(sink.bytes().size()));
  }
  std::filesystem::rename(tmp, path);
}

std::optional<Spectrum> read_spectrum_cache(const std::filesystem::path& path, const MrfModel& model,
                                            std::string* warning) {
  auto warn = [&](const std::string& w) -> std::optional<Spectrum> {
    if (warning) *warning = "spectrum cache '" + path.string() + "': " + w;
    return std::nullopt;
  };
  if (!std::filesystem::exists(path)) return std::nullopt;
  const std::string bytes = read_text(path);
  if (bytes.size() < sizeof kMagic + 5 * 8) return warn("truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) return warn("bad magic");
  ByteSource src(bytes);
  src.skip(sizeof kMagic);
  std::uint64_t n = 0, s = 0, hash = 0, version = 0;
  src.u64(n);
  src.u64(s);
  src.u64(hash);
  src.u64(version);
  if (n != num_sites(model) || hash != model_hash(model) || version != kDynamicsVersion) {
    return warn("model mismatch");
  }
  // Guard the size arithmetic before trusting s.
  if (s > (bytes.size() / 8)) return warn("truncated");
  const std::size_t payload = sizeof kMagic + 4 * 8 + 8 * (2 * s + s * s);
  if (bytes.size() != payload + 8) return warn("truncated or oversized");
  ByteSource tail(bytes);
  tail.skip(payload);
  std::uint64_t sum = 0;
  tail.u64(sum);
  if (sum != fnv1a64(bytes.data(), payload)) return warn("checksum mismatch");
  Spectrum spec;
  spec.support = enumerate_support(model);
  if (spec.support->size() != s) return warn("support size mismatch");
  spec.pi.resize(s);
  spec.eigenvalues.resize(s);
  spec.eigenvectors = DenseMatrix(s, s);
  for (double& v : spec.pi) src.f64(v);
  for (double& v : spec.eigenvalues) src.f64(v);
  for (double& v : spec.eigenvectors.data()) src.f64(v);
  return spec;
}

std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const MrfModel& model) {
  char name[40];
  std::snprintf(name, sizeof name, "spectrum-%016llx.bin", static_cast<unsigned long long>(model_hash(model)));
  return dir / name;
}

void write_spectrum_csv(std::ostream& out, const SpectrumTable& table) {
  out << "rank,beta,lambda\n";
  for (std::size_t b = 0; b < table.betas.size(); ++b) {
    for (std::size_t l = 0; l < table.eigenvalues[b].size(); ++l) {
      out << l + 1 << ',' << format_double(table.betas[b]) << ',' << format_double(table.eigenvalues[b][l]) << '\n';
    }
  }
}

void write_majority_csv(std::ostream& out, const std::vector<ApproximationRow>& rows) {
  out << "graph,beta,degree,poly_err,eigen_err,M\n";
  for (const auto& r : rows) {
    out << r.graph << ',' << format_double(r.beta) << ',' << r.degree << ',' << format_double(r.poly_error)
        << ',' << format_double(r.eigen_error) << ',' << r.eigen_count << '\n';
  }
}

void write_stability_csv(std::ostream& out, const StabilityCurve& curve) {
  out << "t,ns,one_minus_2ns\n";
  for (const auto& p : curve.points) {
    out << format_double(p.t) << ',' << format_double(p.ns) << ',' << format_double(p.stability) << '\n';
  }
}

void write_junta_csv(std::ostream& out, const JuntaExperimentResult& result) {
  out << "seed,recovered,walk_len\n";
  for (const auto& t : result.trials) {
    out << t.seed << ',' << (t.recovered ? 1 : 0) << ',' << t.walk_length << '\n';
  }
}

void write_agnostic_csv(std::ostream& out, const std::vector<AgnosticRow>& rows) {
  out << "seed,err,opt,W,tau_max,T\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << format_double(r.err) << ',' << format_double(r.opt) << ',' << format_double(r.budget)
        << ',' << r.tau_max << ',' << r.samples_T << '\n';
  }
}

void write_family_csv(std::ostream& out, const BasisFamily& family) {
  out << "index,name,kind,support-set,pattern\n";
  for (std::size_t m = 0; m < family.size(); ++m) {
    const auto& g = family[m];
    std::string sites, pattern;
    for (std::size_t j = 0; j < g.sites.size(); ++j) sites += (j ? " " : "") + std::to_string(g.sites[j]);
    for (std::size_t j = 0; j < g.pattern.size(); ++j) {
      pattern += (j ? " " : "") + std::to_string(static_cast<int>(g.pattern[j]));
    }
    out << m << ",\"" << g.name << "\"," << to_string(g.kind) << ',' << sites << ',' << pattern << '\n';
  }
}

void write_feature_csv(std::ostream& out, const FeatureSet& fs) {
  for (std::size_t c = 0; c < fs.cols(); ++c) out << (c ? "," : "") << descriptor(fs.descriptors[c]);
  out << '\n';
  for (std::size_t r = 0; r < fs.rows(); ++r) {
    for (std::size_t c = 0; c < fs.cols(); ++c) out << (c ? "," : "") << format_double(fs.phi(r, c));
    out << '\n';
  }
}

FeatureSet read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("feature csv: empty");
  FeatureSet fs;
  for (const auto& d : split(trim(line), ',')) {
    const auto parts = split(d, ':');
    if (parts.size() != 2) throw InputError("feature csv: bad descriptor '" + d + "'");
    fs.descriptors.emplace_back(static_cast<std::size_t>(to_integer(parts[0], "descriptor")),
                                static_cast<std::size_t>(to_integer(parts[1], "descriptor")));
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != fs.descriptors.size()) throw InputError("feature csv: ragged row");
    for (const auto& v : f) values.push_back(to_double(v, "feature csv"));
    ++rows;
  }
  fs.phi = DenseMatrix(rows, fs.descriptors.size());
  std::copy(values.begin(), values.end(), fs.phi.data().begin());
  return fs;
}

void write_solution_csv(std::ostream& out, const std::vector<std::pair<std::size_t, std::size_t>>& descriptors,
                        const L1Solution& sol) {
  if (descriptors.size() != sol.w.size()) throw InputError("solution csv: descriptor count mismatch");
  out << "feature_descriptor,weight\n";
  for (std::size_t k = 0; k < sol.w.size(); ++k) {
    out << descriptor(descriptors[k]) << ',' << format_double(sol.w[k]) << '\n';
  }
  out << "objective," << format_double(sol.objective) << '\n';
}

void write_hypothesis(std::ostream& out, const Hypothesis& h) {
  out << "# budget=" << format_double(h.budget) << '\n';
  out << "# feature_seed=" << h.feature_seed << '\n';
  out << "# tau_max=" << h.features.tau_max << " T=" << h.features.samples
      << " scheme=" << to_string(h.features.scheme) << '\n';
  out << "# family=" << to_string(h.family.kind) << " size=" << h.family.size() << '\n';
  out << "# clip=" << (h.clip ? 1 : 0) << '\n';
  out << "feature_descriptor,weight\n";
  for (std::size_t k = 0; k < h.weights.size(); ++k) {
    if (h.weights[k] != 0.0) out << descriptor(h.descriptors[k]) << ',' << format_double(h.weights[k]) << '\n';
  }
}

void write_junta_hypothesis(std::ostream& out, const JuntaHypothesis& h) {
  out << "# variables=";
  for (std::size_t j = 0; j < h.variables.size(); ++j) out << (j ? " " : "") << h.variables[j];
  out << "\n# default=" << static_cast<int>(h.default_label) << " complete=" << (h.complete ? 1 : 0) << '\n';
  out << "assignment,label\n";
  for (const auto& [code, label] : h.table) {
    // Digits of the assignment, first variable first.
    std::string digits(h.variables.size(), '0');
    std::uint64_t c = code;
    for (std::size_t j = h.variables.size(); j-- > 0;) {
      const auto d = static_cast<int>(c % h.alphabet);
      c /= h.alphabet;
      digits[j] = h.spins ? (d ? '+' : '-') : static_cast<char>(d < 10 ? '0' + d : 'a' + d - 10);
    }
    out << digits << ',' << static_cast<int>(label) << '\n';
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest '" + path.string() + "'");
  for (const auto& [k, v] : manifest) out << k << '=' << v << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("manifest: line without '='");
    m.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

}  // namespace mrflearn
