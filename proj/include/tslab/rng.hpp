#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tslab {

// Deterministic random source.  The mt19937_64 engine is fully specified by
// the standard; the distributions below are pinned here because the standard
// library's distribution objects are implementation-defined and would break
// bit-identical corpus generation across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Log-uniform over [a, b], a, b > 0.
  double log_uniform(double a, double b) {
    return a * std::exp(uniform01() * std::log(b / a));
  }

  // Box-Muller; consumes two engine draws per pair, caches the second value.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [lo, hi] via rejection-free scaling (bias < 2^-53).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    double u = uniform01();
    auto span = static_cast<double>(hi - lo + 1);
    auto k = static_cast<std::int64_t>(u * span);
    if (k > hi - lo) k = hi - lo;
    return lo + k;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tslab
