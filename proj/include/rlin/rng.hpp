#pragma once

#include <cstdint>
#include <random>

namespace rlin {

/// Seeded generator with a fully specified output stream. std::mt19937_64 is
/// bit-exact across standard libraries; the distributions below avoid the
/// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = eng_();
    while (x >= limit);
    return x % n;
  }

  bool bit() { return eng_() >> 63; }

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

/// SplitMix64 finalizer; a stateless hash for values indexed by position.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trial i in a Monte-Carlo run; trials are independent of scheduling.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t i) { return base ^ i; }

}  // namespace rlin
