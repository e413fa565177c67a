#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

namespace ncdlab {

// Seeded random source with platform-independent derived distributions.
// std::uniform_int_distribution and friends are implementation-defined, so
// everything that feeds a reproducibility contract goes through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double normal();

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = uniform_index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a list of salts.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts);

// Stable 64-bit FNV-1a hash, used to turn identifiers into salts.
std::uint64_t hash_string(const char* s);

}  // namespace ncdlab
