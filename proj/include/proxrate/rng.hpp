#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace proxrate {

// Deterministic counter-based generator. Every draw is a pure function of
// (seed, counter), so instance generation is reproducible across platforms
// and trivially restartable. The exact scheme (documented in the README so it
// can be re-derived in any language):
//
//   u_i     = mix64(seed + i * 0x9E3779B97F4A7C15),  i = 1, 2, ...
//   uniform = ((u >> 11) + 1) * 2^-53               in (0, 1]
//   normal  = sqrt(-2 ln u1) * cos(2 pi u2)          (two uniforms per draw)
//   below(n)= u % n
//
// mix64 is the 64-bit xorshift-multiply finalizer with constants
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on (0, 1]: zero is excluded so log() in the normal transform is
  // always finite, and 1 is attainable so step sizes drawn as u/L can reach
  // the hypothesis boundary s = 1/L exactly.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53;
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). The modulo bias is < 2^-53 for every n used
  // here (n <= a few hundred); accepted for the sake of a trivially portable
  // definition.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // One fair sign from the top bit.
  double sign() { return (next_u64() >> 63) == 0 ? 1.0 : -1.0; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace proxrate
