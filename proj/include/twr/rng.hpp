#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "twr/linalg.hpp"

namespace twr {

// Deterministic random source. Doubles are derived from raw mt19937_64 output
// instead of std::uniform_real_distribution / std::normal_distribution, whose
// sequences are implementation-defined; this keeps seeded runs identical
// across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in {0, ..., n-1}.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const auto idx = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return idx < n ? idx : n - 1;
  }

  // Standard normal via Box-Muller; generates values in pairs.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Circularly symmetric complex normal with the given total variance.
  Complex complex_gaussian(double variance) {
    const double scale = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return Complex(scale * re, scale * im);
  }

  CVec complex_gaussian_vector(Index n, double variance) {
    CVec out(n);
    for (Index i = 0; i < n; ++i) out(i) = complex_gaussian(variance);
    return out;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace twr
