#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ngcn {

/// Deterministic random source. mt19937_64 with hand-rolled mappings so the
/// produced streams are identical across platforms and standard libraries
/// (std::uniform_* distributions and std::shuffle are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, bound). bound must be > 0.
  std::size_t next_index(std::size_t bound) { return static_cast<std::size_t>(gen_() % bound); }

  /// Fisher–Yates shuffle with this generator.
  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = next_index(i);
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// Derives an independent stream seed from (seed, stream); splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ngcn
