#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace bubbles {

enum class BoundSide { Upper, Lower };

/// Shape of a closed-form tail bound g on (0, inf):
///   Power:    g(x) = coefficient * x^(-rate)
///   Gaussian: g(x) = coefficient * exp(-rate * (log x - center)^2)
enum class BoundShape { Power, Gaussian };

/// Machine-checkable claim about the recovery function b_eps on [x_from, inf):
/// b_eps(x) <= g(x) (Upper) or b_eps(x) >= g(x) (Lower). epsilon = 0 refers to b.
struct TailBound {
  BoundSide side = BoundSide::Upper;
  BoundShape shape = BoundShape::Power;
  double coefficient = 0.0;
  double rate = 0.0;
  double center = 0.0;
  double x_from = 1.0;
  double epsilon = 0.0;
  std::string source = "user";

  double operator()(double x) const;

  /// Integral of g(e^u) du over [log x_from, inf); +inf when it diverges.
  double log_tail_integral() const;

  /// liminf of g at infinity is positive (only constant/growing power lower bounds).
  bool bounded_away_from_zero() const;
};

/// Throws CertificateRejected if `values[i]` violates `bound` at any xs[i] >= x_from
/// by more than `slack`.
void validate_tail_bound(const TailBound& bound, std::span<const double> xs, std::span<const double> values,
                         double slack, const std::string& quantity);

enum class SeriesShape { Power, Geometric };

/// Termwise bound on a nonnegative sequence s_k for k >= from_k:
///   Power:     g(k) = coefficient * k^(-rate)
///   Geometric: g(k) = coefficient * rate^k
struct SeriesBound {
  BoundSide side = BoundSide::Upper;
  SeriesShape shape = SeriesShape::Power;
  double coefficient = 0.0;
  double rate = 0.0;
  std::size_t from_k = 1;

  double term(std::size_t k) const;
  /// Whether the series of g diverges.
  bool sum_diverges() const;
  /// Upper bound on sum_{k >= n} g(k) (n >= from_k); +inf when divergent.
  double tail_sum_bound(std::size_t n) const;
};

}  // namespace bubbles
