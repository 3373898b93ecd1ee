#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrflearn/errors.hpp"
#include "mrflearn/io.hpp"
#include "mrflearn/support.hpp"

using namespace mrflearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mrflearn_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Spectrum spectrum_of(const MrfModel& m) {
  const TransitionMatrix p = exact_transition_matrix(m);
  return eigendecompose(p, stationary_exact(*p.support));
}

}  // namespace

TEST(ModelText, IsingRoundTrip) {
  const MrfModel m = IsingModel(make_cycle(4), {0.1, 0.2, 0.3, 0.4}, 0.25);
  const fs::path dir = scratch_dir("model");
  write_model_file(dir / "m.txt", m);
  const MrfModel back = read_model_file(dir / "m.txt");
  EXPECT_EQ(describe(back), describe(m));
  const auto& ising = std::get<IsingModel>(back);
  EXPECT_DOUBLE_EQ(ising.beta()[2], 0.3);
  EXPECT_DOUBLE_EQ(ising.field(), 0.25);
}

TEST(ModelText, ColoringAndComments) {
  const MrfModel m = parse_model_text("# triangle\n3 3 4\n\n0 1\n1 2\n0 2\n");
  ASSERT_FALSE(is_ising(m));
  EXPECT_EQ(alphabet_size(m), 4u);
  EXPECT_EQ(graph_of(m).num_edges(), 3u);
  EXPECT_EQ(describe(parse_model_text(describe(m))), describe(m));
}

TEST(ModelText, Malformed) {
  EXPECT_THROW(parse_model_text(""), InputError);
  EXPECT_THROW(parse_model_text("3 2 ising\n0 1 0.1\n"), InputError);  // too few edges
  EXPECT_THROW(parse_model_text("2 1 ising\n0 5 0.1\n"), InputError);  // node out of range
  EXPECT_THROW(read_model_file("/nonexistent/model.txt"), InputError);
}

TEST(StateString, RoundTrip) {
  const MrfModel ising = IsingModel::uniform(make_cycle(4), 0.1);
  const Configuration x{1, -1, -1, 1};
  EXPECT_EQ(state_string(ising, x), "+--+");
  EXPECT_EQ(parse_state_string(ising, "+--+"), x);
  EXPECT_THROW(parse_state_string(ising, "+-x+"), InputError);
  EXPECT_THROW(parse_state_string(ising, "+-"), InputError);

  const MrfModel col = ColoringModel(make_path(3), 12);
  const Configuration c{0, 10, 11};
  EXPECT_EQ(state_string(col, c), "0ab");
  EXPECT_EQ(parse_state_string(col, "0ab"), c);
}

TEST(WalkCsv, RoundTrip) {
  const MrfModel m = IsingModel::uniform(make_cycle(3), 0.2);
  LabeledWalk w;
  w.states = {Configuration{1, 1, 1}, Configuration{1, -1, 1}, Configuration{1, -1, 1}};
  w.labels = {1, -1, -1};
  std::stringstream ss;
  write_walk_csv(ss, m, w);
  const LabeledWalk back = read_walk_csv(ss, m);
  EXPECT_EQ(back.states, w.states);
  EXPECT_EQ(back.labels, w.labels);
}

TEST(SpectrumCache, HitMissAndCorruption) {
  const fs::path dir = scratch_dir("cache");
  const MrfModel m = IsingModel::uniform(make_cycle(5), 0.3);
  const Spectrum spec = spectrum_of(m);
  const fs::path path = spectrum_cache_path(dir, m);
  std::string warning;
  EXPECT_FALSE(read_spectrum_cache(path, m, &warning).has_value());
  EXPECT_TRUE(warning.empty());

  write_spectrum_cache(path, m, spec);
  const auto hit = read_spectrum_cache(path, m, &warning);
  ASSERT_TRUE(hit.has_value());
  EXPECT_TRUE(warning.empty());
  EXPECT_EQ(hit->eigenvalues, spec.eigenvalues);
  EXPECT_EQ(hit->pi, spec.pi);
  EXPECT_TRUE(std::ranges::equal(hit->eigenvectors.data(), spec.eigenvectors.data()));

  // A different beta hashes to a different path, and the stored hash rejects it
  // even when forced onto the same file.
  const MrfModel other = IsingModel::uniform(make_cycle(5), 0.31);
  EXPECT_NE(spectrum_cache_path(dir, other), path);
  EXPECT_NE(model_hash(other), model_hash(m));
  EXPECT_FALSE(read_spectrum_cache(path, other, &warning).has_value());
  EXPECT_FALSE(warning.empty());

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(64);
    const char junk = 0x5a;
    f.write(&junk, 1);
  }
  warning.clear();
  EXPECT_FALSE(read_spectrum_cache(path, m, &warning).has_value());
  EXPECT_FALSE(warning.empty());

  fs::resize_file(path, 10);
  warning.clear();
  EXPECT_FALSE(read_spectrum_cache(path, m, &warning).has_value());
  EXPECT_FALSE(warning.empty());
}

TEST(Hash, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64("", 0), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a", 1), 0xaf63dc4c8601ec8cULL);
}

TEST(Manifest, RoundTrip) {
  const fs::path dir = scratch_dir("manifest");
  const Manifest m{{"command", "spectrum"}, {"seed", "7"}, {"config.model.beta", "0.1"}};
  write_manifest(dir / "manifest.txt", m);
  EXPECT_EQ(read_manifest(dir / "manifest.txt"), m);
}

TEST(FeatureCsv, RoundTrip) {
  FeatureSet fs;
  fs.phi = DenseMatrix(2, 3);
  fs.phi(0, 0) = 0.1;
  fs.phi(0, 1) = -1.0 / 3.0;
  fs.phi(1, 2) = 1e-17;
  fs.descriptors = {{0, 0}, {0, 1}, {2, 0}};
  std::stringstream ss;
  write_feature_csv(ss, fs);
  const FeatureSet back = read_feature_csv(ss);
  EXPECT_EQ(back.descriptors, fs.descriptors);
  ASSERT_EQ(back.rows(), 2u);
  EXPECT_TRUE(std::ranges::equal(back.phi.data(), fs.phi.data()));
}

TEST(FormatDouble, ExactRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}
