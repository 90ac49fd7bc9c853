#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace tuplemax {

// Seeded generator used everywhere randomness is needed. The engine is
// std::mt19937_64 (its output sequence is pinned by the standard); the
// distribution transforms are written out explicitly because the standard
// library's distribution objects are implementation-defined and would break
// bit-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    if ((n & (n - 1)) == 0) return engine_() & (n - 1);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;  // largest multiple of n <= max
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Standard normal via Box-Muller (two fresh uniforms per draw).
  double gaussian() {
    double u = uniform();
    const double v = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(two_pi * v);
  }

  // Seed for an independent stream derived from a base seed and a purpose
  // tag, so that consumers of one stream cannot perturb another.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tuplemax
