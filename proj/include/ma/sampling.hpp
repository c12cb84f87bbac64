#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace ma {

/// Radical-inverse of n in the given prime base, in [0,1).
inline double radical_inverse(std::uint64_t n, std::uint32_t base) {
  double inv = 1.0 / base;
  double scale = inv;
  double value = 0.0;
  while (n > 0) {
    value += static_cast<double>(n % base) * scale;
    n /= base;
    scale *= inv;
  }
  return value;
}

/// Deterministic 4-dimensional low-discrepancy sequence (Halton, bases
/// 2/3/5/7) with a seed-derived start offset. The same seed always yields
/// the same point stream.
class HaltonBox4 {
 public:
  explicit HaltonBox4(std::uint64_t seed) : index_(1 + (seed % 9176221ULL)) {}

  std::array<double, 4> next() {
    std::array<double, 4> p = {
        radical_inverse(index_, 2), radical_inverse(index_, 3),
        radical_inverse(index_, 5), radical_inverse(index_, 7)};
    ++index_;
    return p;
  }

 private:
  std::uint64_t index_;
};

/// All pseudo-randomness flows from one 64-bit seed.
inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace ma
