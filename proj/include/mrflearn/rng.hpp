// Counter-based, splittable random streams.
//
// A stream is SplitMix64: the state advances by the golden-ratio increment and
// each output is the state passed through the SplitMix64 finalizer. Streams for
// parallel tasks are keyed, never shared: the seed of task (t1, t2, ...) under
// master m is
//
//   s0 = mix64(m),  s_{k+1} = mix64(s_k ^ (t_{k+1} + 0x9E3779B97F4A7C15 * (k + 1)))
//
// where mix64 is the SplitMix64 finalizer. The same key always yields the same
// draws, independent of scheduling.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mrflearn {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> task) {
  std::uint64_t s = mix64(master);
  std::uint64_t k = 1;
  for (std::uint64_t t : task) {
    s = mix64(s ^ (t + kGoldenGamma * k));
    ++k;
  }
  return s;
}

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : state_(seed) {}
  RngStream(std::uint64_t master, std::initializer_list<std::uint64_t> task)
      : state_(derive_seed(master, task)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool coin() { return ((*this)() >> 63) != 0; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace mrflearn
