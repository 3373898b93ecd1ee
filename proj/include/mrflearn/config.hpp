// Run configuration: flat key=value text with [section] headers.
//
//   [model]
//   graph = cycle
//   n = 10
//   beta = 0.1
//
// Keys outside the schema are rejected. Precedence, lowest first: file,
// environment (MRFLEARN_<SECTION>_<KEY>, upper case), command-line overrides.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mrflearn/models.hpp"

namespace mrflearn {

// Section -> allowed keys.
const std::map<std::string, std::vector<std::string>>& config_schema();

class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // dotted = "section.key"; throws InputError for keys outside the schema.
  void set(const std::string& dotted, const std::string& value);
  void set(const std::string& section, const std::string& key, const std::string& value);
  // Applies MRFLEARN_<SECTION>_<KEY> for every schema key that getenv finds.
  void apply_environment(const std::function<const char*(const char*)>& getenv_fn);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  std::size_t get_size(const std::string& section, const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  // Comma-separated lists.
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                     std::vector<std::size_t> fallback) const;

  // Canonical text of every set value, sorted by section and key.
  std::string echo() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

// Builds the model from [model]: either `file` (model text) or
// kind/graph/n/rows/cols/p/graph_seed/beta/field/q.
MrfModel build_model(const RunConfig& config);

}  // namespace mrflearn
