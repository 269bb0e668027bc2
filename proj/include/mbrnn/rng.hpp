#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mbrnn {

// 64-bit splitmix finalizer. Used both as the PRNG output function and for
// child-seed derivation, so streams are reproducible across implementations.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Child-seed derivation: seed = mix64(mix64(root + golden*fnv1a(label)) + golden*(index+1)).
// Streams for different (label, index) pairs are decorrelated; documented in the README.
inline std::uint64_t child_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = mix64(root + kGolden * fnv1a64(label));
  return mix64(h + kGolden * (index + 1));
}

// Splitmix64 stream. Small, fast, and fully specified here so that sampled
// values do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  using result_type = std::uint64_t;
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ull; }

  std::uint64_t operator()() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1); safe under log().
  double u01_open() { return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer on [0, n). Rejection keeps the draw exactly uniform.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive range
    return lo + static_cast<std::int64_t>(uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double exponential(double rate) { return -std::log(u01_open()) / rate; }

  // Box-Muller without caching: the stream stays position-independent.
  double normal() {
    const double u1 = u01_open();
    const double u2 = u01_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

  // Marsaglia-Tsang for shape >= 1; boosted for shape < 1.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = u01_open();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = u01_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

 private:
  std::uint64_t state_;
};

}  // namespace mbrnn
