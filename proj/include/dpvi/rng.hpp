#pragma once

#include <cstdint>
#include <random>

namespace dpvi {

// All randomness flows from one 64-bit seed through this split scheme:
// a child stream is derived by mixing (seed, tag_a, tag_b) through
// splitmix64. The scheme (not the generator) is the reproducibility
// contract; per-round and per-oracle-call tags are documented at the
// call sites that use them.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t tag_a, uint64_t tag_b = 0) {
  uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (0xA0761D6478BD642FULL + tag_a));
  s = splitmix64(s ^ (0xE7037ED1A0B428DBULL + tag_b));
  return s;
}

class RngStream {
 public:
  explicit RngStream(uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(eng_);
  }
  // uniform index in [0, n)
  size_t index(size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(eng_);
  }
  uint64_t next_u64() { return eng_(); }

  RngStream child(uint64_t tag_a, uint64_t tag_b = 0) {
    return RngStream(derive_seed(eng_(), tag_a, tag_b));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dpvi
