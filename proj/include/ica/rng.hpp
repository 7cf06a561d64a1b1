#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "ica/error.hpp"

namespace ica {

// Deterministic random source.  The integer stream is std::mt19937_64,
// whose output is fixed by the C++ standard; all floating-point
// distributions are implemented here by explicit transforms (the standard
// library's distribution objects are not portable across implementations).
// Identical seeds therefore produce identical draws on any conforming
// platform, up to libm rounding of elementary functions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0, 1): 53 mantissa bits, offset by half
  // a ulp so 0 and 1 are never returned (safe under log).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by rejection, no modulo bias.
  std::uint64_t bounded(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Laplace with unit scale (density exp(-|x|)/2, variance 2), by
  // inverting the CDF.
  double laplace() {
    const double v = uniform01() - 0.5;
    return v < 0.0 ? std::log1p(2.0 * v) : -std::log1p(-2.0 * v);
  }

  // Density proportional to exp(-|x|^3), by rejection from N(0, 0.6^2).
  // With h(x) = x^2 / (2 sigma^2) - |x|^3, accept when log u <= h(x) - h*,
  // h* = 1 / (54 sigma^6) the maximum of h; acceptance rate is about 0.8,
  // so the attempt cap sits three orders of magnitude above the mean.
  double cube_exp() {
    constexpr double sigma = 0.6;
    constexpr double sigma2 = sigma * sigma;
    constexpr int kMaxAttempts = 2000;
    const double h_max = 1.0 / (54.0 * sigma2 * sigma2 * sigma2);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const double x = sigma * gaussian();
      const double ax = std::abs(x);
      const double h = x * x / (2.0 * sigma2) - ax * ax * ax;
      if (std::log(uniform01()) <= h - h_max) return x;
    }
    throw sampler_stall_error("cube_exp rejection sampler exceeded its attempt budget");
  }

  // Scale mixture alpha N(0,1) + (1-alpha) N(0, sigma^2): Bernoulli
  // component pick, then one gaussian draw.
  double gauss_mixture(double alpha, double sigma) {
    const double u = uniform01();
    const double z = gaussian();
    return u <= alpha ? z : sigma * z;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ica
