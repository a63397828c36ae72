#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ocsim {

// mt19937_64 with hand-rolled scaling.  std::uniform_*_distribution is not
// pinned down by the standard, so sampling through it would make traces
// depend on the standard library build; the raw engine output is portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, n)
  uint64_t uniform_u64(uint64_t n) {
    // modulo bias is < 2^-53 for the ranges used here (n << 2^64)
    return eng_() % n;
  }

  // [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [lo, hi] inclusive
  int64_t uniform_i64(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform_u64(static_cast<uint64_t>(hi - lo + 1)));
  }

  // mean > 0
  double exponential(double mean) {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return -mean * std::log(u);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ocsim
