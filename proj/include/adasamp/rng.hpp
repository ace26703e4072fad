#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace adasamp {

// SplitMix64 finalizer. Used to derive statistically independent stream
// seeds from one master seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Named substreams split from a master seed. Index sampling always has a
/// stream of its own so that changing the data or initialization never
/// perturbs the sequence of draws.
enum class Stream : std::uint64_t {
  sampling = 1,
  data = 2,
  init = 3,
  probe = 4,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) built from the top 53 bits of one engine word.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Rng make_stream(std::uint64_t master_seed, Stream stream) {
  return Rng(mix_seed(master_seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace adasamp
