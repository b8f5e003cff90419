#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tslab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Reciprocal with the convention 1/inf = 0, used throughout the exponent
// arithmetic.
inline double recip(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// delta(p, q) = 1/q - 1/p for p, q in (0, inf].
inline double delta_exponent(double p, double q) {
  if (!(p > 0.0) || !(q > 0.0))
    throw std::invalid_argument("delta_exponent: exponents must lie in (0, inf]");
  return recip(q) - recip(p);
}

// Conjugate exponent p' for p in [1, inf]: 1/p + 1/p' = 1.
inline double holder_conjugate(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("holder_conjugate: p must be >= 1");
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

// Intermediate exponent of the real-interpolation scale:
// 1/p_theta = (1-theta)/p0 + theta/p1.
inline double interp_exponent(double p0, double p1, double theta) {
  if (!(p0 > 0.0) || !(p1 > 0.0))
    throw std::invalid_argument("interp_exponent: exponents must lie in (0, inf]");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("interp_exponent: theta must lie in (0, 1)");
  double inv = (1.0 - theta) * recip(p0) + theta * recip(p1);
  return inv == 0.0 ? kInf : 1.0 / inv;
}

inline double interp_weight_exponent(double s0, double s1, double theta) {
  return (1.0 - theta) * s0 + theta * s1;
}

}  // namespace tslab
