#pragma once

#include <cmath>
#include <numbers>

namespace bubbles {

/// Standard normal cdf, accurate in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi(hi) - Phi(lo) without cancellation in the upper tail.
inline double normal_interval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

/// log Phi(x); uses log1p(-Phi(-x)) on the right so values near 1 keep precision.
inline double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-normal_cdf(-x));
  return std::log(normal_cdf(x));
}

}  // namespace bubbles
