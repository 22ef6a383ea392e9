#include "bubbles/certificates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bubbles/error.hpp"

namespace bubbles {

double TailBound::operator()(double x) const {
  switch (shape) {
    case BoundShape::Power:
      return coefficient * std::pow(x, -rate);
    case BoundShape::Gaussian: {
      const double d = std::log(x) - center;
      return coefficient * std::exp(-rate * d * d);
    }
  }
  return 0.0;
}

double TailBound::log_tail_integral() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (coefficient <= 0.0) return 0.0;
  switch (shape) {
    case BoundShape::Power:
      if (rate <= 0.0) return inf;
      return coefficient * std::pow(x_from, -rate) / rate;
    case BoundShape::Gaussian:
      if (rate <= 0.0) return inf;
      return 0.5 * coefficient * std::sqrt(std::numbers::pi / rate) *
             std::erfc(std::sqrt(rate) * (std::log(x_from) - center));
  }
  return inf;
}

bool TailBound::bounded_away_from_zero() const {
  return side == BoundSide::Lower && shape == BoundShape::Power && rate <= 0.0 && coefficient > 0.0;
}

void validate_tail_bound(const TailBound& bound, std::span<const double> xs, std::span<const double> values,
                         double slack, const std::string& quantity) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < bound.x_from) continue;
    const double g = bound(xs[i]);
    const bool violated =
        bound.side == BoundSide::Upper ? values[i] > g + slack : values[i] < g - slack;
    if (violated) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "certificate (" << bound.source << ") rejected: " << quantity << "(" << xs[i] << ") = " << values[i]
          << (bound.side == BoundSide::Upper ? " exceeds claimed upper bound " : " is below claimed lower bound ")
          << g;
      fail(ErrorKind::CertificateRejected, msg.str());
    }
  }
}

double SeriesBound::term(std::size_t k) const {
  const double kk = static_cast<double>(k);
  switch (shape) {
    case SeriesShape::Power: return coefficient * std::pow(kk, -rate);
    case SeriesShape::Geometric: return coefficient * std::pow(rate, kk);
  }
  return 0.0;
}

bool SeriesBound::sum_diverges() const {
  if (coefficient <= 0.0) return false;
  switch (shape) {
    case SeriesShape::Power: return rate <= 1.0;
    case SeriesShape::Geometric: return rate >= 1.0;
  }
  return true;
}

double SeriesBound::tail_sum_bound(std::size_t n) const {
  if (sum_diverges()) return std::numeric_limits<double>::infinity();
  if (coefficient <= 0.0) return 0.0;
  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  switch (shape) {
    case SeriesShape::Power:
      // g(n) + integral_n^inf g
      return coefficient * (std::pow(nn, -rate) + std::pow(nn, 1.0 - rate) / (rate - 1.0));
    case SeriesShape::Geometric:
      return coefficient * std::pow(rate, nn) / (1.0 - rate);
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace bubbles
