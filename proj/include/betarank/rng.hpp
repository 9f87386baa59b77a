#pragma once

#include <cmath>
#include <cstdint>

namespace betarank::rng {

// Deterministic generator with explicitly coded distribution transforms.
// The standard library engines are portable but its distributions are
// implementation-defined, which would break byte-reproducible outputs.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derive an independent stream, e.g. per epoch or per net.
  SplitMix64 fork(std::uint64_t stream) const {
    SplitMix64 mixer(state ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return SplitMix64(mixer.next());
  }
};

/// Uniform double in [0, 1).
inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g.next() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(SplitMix64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Unbiased uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_below(SplitMix64& g, std::uint64_t n) {
  const std::uint64_t threshold = -n % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t r = g.next();
    if (r >= threshold) return r % n;
  }
}

/// Standard normal via Box-Muller (sine half discarded).
inline double normal(SplitMix64& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

/// Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
inline double gamma(SplitMix64& g, double shape) {
  if (shape < 1.0) {
    const double u = uniform01(g);
    return gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal(g);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01(g);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// In-place Fisher-Yates shuffle.
template <typename Vec>
void shuffle(SplitMix64& g, Vec& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace betarank::rng
