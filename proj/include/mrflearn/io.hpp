// File formats: model text, walk dumps, the spectrum cache, CSV exports and
// run manifests. Floats are written with 17 significant digits.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrflearn/basis.hpp"
#include "mrflearn/experiments.hpp"
#include "mrflearn/features.hpp"
#include "mrflearn/gibbs.hpp"
#include "mrflearn/junta.hpp"
#include "mrflearn/learners.hpp"
#include "mrflearn/models.hpp"
#include "mrflearn/regression.hpp"
#include "mrflearn/spectral.hpp"

namespace mrflearn {

// Bumped whenever the chain's transition rule changes; part of the cache key.
inline constexpr std::uint32_t kDynamicsVersion = 1;

std::string format_double(double v);

// Model text:
//   n m ising|<q>
//   i j [beta_ij]      (m lines; beta only for Ising)
//   B <value>          (optional, Ising only)
// Blank lines and lines starting with '#' are ignored.
MrfModel parse_model_text(const std::string& text);
MrfModel read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const MrfModel& model);

// One character per site: '+'/'-' for spins, 0-9 then a-z for colors.
std::string state_string(const MrfModel& model, const Configuration& x);
Configuration parse_state_string(const MrfModel& model, const std::string& s);

// CSV `step,state,label`.
void write_walk_csv(std::ostream& out, const MrfModel& model, const LabeledWalk& walk);
LabeledWalk read_walk_csv(std::istream& in, const MrfModel& model);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
// Hash of the model text and the dynamics version.
std::uint64_t model_hash(const MrfModel& model);

// Binary cache: magic "MRFSPEC1", n, state count, model hash, dynamics
// version, then little-endian doubles for pi, lambda and the eigenvector rows,
// then an FNV-1a checksum of everything before it.
void write_spectrum_cache(const std::filesystem::path& path, const MrfModel& model, const Spectrum& spec);
// nullopt on a missing file; nullopt plus a warning in `warning` on any
// mismatch or corruption.
std::optional<Spectrum> read_spectrum_cache(const std::filesystem::path& path, const MrfModel& model,
                                            std::string* warning = nullptr);
std::filesystem::path spectrum_cache_path(const std::filesystem::path& dir, const MrfModel& model);

void write_spectrum_csv(std::ostream& out, const SpectrumTable& table);
void write_majority_csv(std::ostream& out, const std::vector<ApproximationRow>& rows);
void write_stability_csv(std::ostream& out, const StabilityCurve& curve);
void write_junta_csv(std::ostream& out, const JuntaExperimentResult& result);
void write_agnostic_csv(std::ostream& out, const std::vector<AgnosticRow>& rows);

// `index,name,kind,support-set,pattern`
void write_family_csv(std::ostream& out, const BasisFamily& family);
// Header of `t:m` descriptors, one row per example.
void write_feature_csv(std::ostream& out, const FeatureSet& fs);
FeatureSet read_feature_csv(std::istream& in);
// `feature_descriptor,weight` rows then `objective,<value>`.
void write_solution_csv(std::ostream& out, const std::vector<std::pair<std::size_t, std::size_t>>& descriptors,
                        const L1Solution& sol);
// Weights CSV with a commented header carrying budget, seed and feature config.
void write_hypothesis(std::ostream& out, const Hypothesis& h);
// Commented header with J, then `assignment,label` rows.
void write_junta_hypothesis(std::ostream& out, const JuntaHypothesis& h);

// key=value lines, in the given order.
using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace mrflearn
