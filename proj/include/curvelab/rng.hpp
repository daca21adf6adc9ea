#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace curvelab {

// Deterministic stream: identical (seed, stream) gives identical draws on
// every platform.  The standard distributions are not portable, so the
// transforms are spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32),
                      std::uint32_t{0x9e3779b9}};
    eng_.seed(seq);
  }

  // Uniform in [0, 1).
  double uniform() {
    return (eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; pairs are drawn eagerly so the stream position is
  // independent of how callers interleave gauss() with other draws.
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double c = std::cos(2.0 * 3.14159265358979323846 * u2);
    double s = std::sin(2.0 * 3.14159265358979323846 * u2);
    spare_ = r * s;
    have_spare_ = true;
    return r * c;
  }

  int rademacher() { return (eng_() & 1u) ? 1 : -1; }

  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace curvelab
