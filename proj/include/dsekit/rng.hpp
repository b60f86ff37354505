#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dsekit {

// Deterministic random source. Every stochastic component of the library
// draws through this class so results are reproducible across platforms,
// runs, and worker counts. Independent substreams (per trial, per agent,
// per iteration) are derived from one master seed with a splitmix64-style
// hash, which keeps trial k's bits identical no matter how work is split.
class rng {
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  // U[0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller with one cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Inverse-CDF draw; `scale` is the diversity parameter b (variance 2 b^2).
  double laplace(double mean, double scale) {
    double u = uniform() - 0.5;
    while (u == -0.5) u = uniform() - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return mean - scale * sign * std::log(1.0 - 2.0 * std::abs(u));
  }

  // Standard Cauchy. tan() near +-pi/2 stays finite in doubles, so no
  // rejection is needed; downstream users clamp to their search boxes.
  double cauchy() {
    return std::tan(3.14159265358979323846 * (uniform() - 0.5));
  }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t integer(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Hash-derive a child seed from a master seed and up to three stream
  // labels. Used for per-trial and per-agent substreams.
  static std::uint64_t derive(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix(master ^ 0x2545f4914f6cdd1dull);
    s = mix(s ^ a);
    s = mix(s ^ b);
    s = mix(s ^ c);
    return s;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dsekit
