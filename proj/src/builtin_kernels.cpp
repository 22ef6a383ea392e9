#include "bubbles/builtin_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bubbles/error.hpp"
#include "bubbles/quadrature.hpp"
#include "bubbles/special.hpp"

namespace bubbles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of h y^power over (lo, hi) intersected with the segment (s0, s1).
double uniform_piece(double h, double s0, double s1, double lo, double hi, int power) {
  const double l = std::max(lo, s0);
  const double r = std::min(hi, s1);
  if (!(r > l)) return 0.0;
  return power == 0 ? h * (r - l) : 0.5 * h * (r * r - l * l);
}

}  // namespace

// ==========================================================================
// Two-point complete
// ==========================================================================

TwoPointCompleteKernel::TwoPointCompleteKernel(double a, double c, double p, double b_max)
    : a_(a), c_(c), p_(p), b_max_(b_max) {
  if (!(a > 0.0 && a < 1.0)) fail(ErrorKind::Config, "two-point-complete: a must lie in (0, 1)");
  if (!(c > 0.0)) fail(ErrorKind::Config, "two-point-complete: c must be positive");
  if (!(p >= 0.0)) fail(ErrorKind::Config, "two-point-complete: p must be nonnegative");
  if (!(b_max > 0.0 && b_max < a)) fail(ErrorKind::Config, "two-point-complete: b_max must lie in (0, a)");
}

double TwoPointCompleteKernel::b(double x) const { return std::min(b_max_, c_ * std::pow(x, -p_)); }

std::vector<Atom> TwoPointCompleteKernel::atoms(double x) const {
  const double bx = b(x);
  return {{bx * x / a_, a_}, {(1.0 - bx) * x / (1.0 - a_), 1.0 - a_}};
}

std::optional<TwoPointForm> TwoPointCompleteKernel::two_point_form(double x) const { return TwoPointForm{a_, b(x)}; }

std::vector<TailBound> TwoPointCompleteKernel::analytic_bounds(double epsilon, double x_from) const {
  // b_eps = b while the up atom sits at or above x (1 + eps).
  if (1.0 + epsilon > (1.0 - b_max_) / (1.0 - a_)) return {};
  TailBound bound;
  bound.x_from = x_from;
  bound.epsilon = epsilon;
  bound.source = "analytic:two-point-complete";
  if (p_ == 0.0) {
    bound.side = BoundSide::Lower;
    bound.coefficient = std::min(b_max_, c_);
    bound.rate = 0.0;
  } else {
    bound.side = BoundSide::Upper;
    bound.coefficient = c_;
    bound.rate = p_;
  }
  return {bound};
}

// ==========================================================================
// Absorbing doubling
// ==========================================================================

AbsorbingDoublingKernel::AbsorbingDoublingKernel(double level) : level_(level) {
  if (!(level > 0.0)) fail(ErrorKind::Config, "absorbing-doubling: level must be positive");
}

std::vector<Atom> AbsorbingDoublingKernel::atoms(double x) const {
  if (x <= level_) return {{x, 1.0}};
  return {{level_, 0.5}, {2.0 * x - level_, 0.5}};
}

std::optional<TwoPointForm> AbsorbingDoublingKernel::two_point_form(double x) const {
  if (x <= level_) return std::nullopt;
  return TwoPointForm{0.5, level_ / (2.0 * x)};
}

std::vector<TailBound> AbsorbingDoublingKernel::analytic_bounds(double epsilon, double x_from) const {
  if (epsilon >= 1.0) return {};
  TailBound bound;
  bound.side = BoundSide::Upper;
  bound.coefficient = 0.5 * level_;
  bound.rate = 1.0;
  bound.x_from = std::max(x_from, level_ / (1.0 - epsilon));
  bound.epsilon = epsilon;
  bound.source = "analytic:absorbing-doubling";
  return {bound};
}

// ==========================================================================
// Uniform doubling
// ==========================================================================

double UniformDoublingKernel::density(double x, double y) const {
  if (x <= 1.0) return (y > 0.0 && y < 2.0 * x) ? 0.5 / x : 0.0;
  return ((y > 0.0 && y < 1.0) || (y > 2.0 * x - 1.0 && y < 2.0 * x)) ? 0.5 : 0.0;
}

std::vector<double> UniformDoublingKernel::breakpoints(double x) const {
  if (x <= 1.0) return {};
  return {1.0, 2.0 * x - 1.0};
}

double UniformDoublingKernel::density_moment(double x, double lo, double hi, int power) const {
  if (x <= 1.0) return uniform_piece(0.5 / x, 0.0, 2.0 * x, lo, hi, power);
  return uniform_piece(0.5, 0.0, 1.0, lo, hi, power) + uniform_piece(0.5, 2.0 * x - 1.0, 2.0 * x, lo, hi, power);
}

double UniformDoublingKernel::sample_density(double x, RandomStream& rng) const {
  if (x <= 1.0) return 2.0 * x * rng.uniform();
  const double u = rng.uniform();
  if (u < 0.5) return 2.0 * u;
  return 2.0 * x - 1.0 + 2.0 * (u - 0.5);
}

std::vector<TailBound> UniformDoublingKernel::analytic_bounds(double epsilon, double x_from) const {
  if (epsilon >= 1.0) return {};
  TailBound bound;
  bound.side = BoundSide::Upper;
  bound.coefficient = 0.25;
  bound.rate = 1.0;
  bound.x_from = std::max(x_from, 1.0 / (1.0 - epsilon));
  bound.epsilon = epsilon;
  bound.source = "analytic:uniform-doubling";
  return {bound};
}

// ==========================================================================
// Affine drop
// ==========================================================================

AffineDropKernel::AffineDropKernel(double coefficient) : c_(coefficient) {
  if (!(coefficient > 0.0 && coefficient <= 2.0 / 3.0))
    fail(ErrorKind::Config, "affine-drop: coefficient must lie in (0, 2/3]");
}

std::vector<Atom> AffineDropKernel::atoms(double x) const {
  const double up_mass = c_ * x / (x + 1.0);
  const double up_mean = 1.5 * c_ * x * x / (x + 1.0);
  const double a_hat = 1.0 - up_mass;
  return {{(x - up_mean) / a_hat, a_hat}};
}

double AffineDropKernel::density(double x, double y) const {
  return (y >= x && y <= 2.0 * x) ? c_ / (x + 1.0) : 0.0;
}

double AffineDropKernel::density_moment(double x, double lo, double hi, int power) const {
  return uniform_piece(c_ / (x + 1.0), x, 2.0 * x, lo, hi, power);
}

double AffineDropKernel::sample_density(double x, RandomStream& rng) const { return x * (1.0 + rng.uniform()); }

// ==========================================================================
// Exponential ratio
// ==========================================================================

namespace {

// (1 - e^-x) / (1 - e^-(x t)), accurate for small x.
double exp_ratio(double x, double t) { return std::expm1(-x) / std::expm1(-x * t); }

}  // namespace

double ExponentialRatioKernel::density(double x, double y) const {
  if (y < x) return 0.0;
  return 0.5 * std::numbers::e * exp_ratio(x, y / x) / x * std::exp(-y / x);
}

double ExponentialRatioKernel::upper_mass(double x) const {
  auto f = [x](double t) { return exp_ratio(x, t) * std::exp(-t); };
  return 0.5 * std::numbers::e * integrate(f, 1.0, kTailRatio).value;
}

double ExponentialRatioKernel::upper_mean(double x) const {
  auto f = [x](double t) { return t * exp_ratio(x, t) * std::exp(-t); };
  return 0.5 * std::numbers::e * x * integrate(f, 1.0, kTailRatio).value;
}

std::vector<Atom> ExponentialRatioKernel::atoms(double x) const {
  const double a_hat = 1.0 - upper_mass(x);
  return {{(x - upper_mean(x)) / a_hat, a_hat}};
}

double ExponentialRatioKernel::sample_density(double x, RandomStream& rng) const {
  // Proposal t = 1 + Exp(1); acceptance probability exp_ratio(x, t) <= 1.
  for (;;) {
    const double t = 1.0 + rng.exponential();
    if (rng.uniform() <= exp_ratio(x, t)) return x * t;
  }
}

// ==========================================================================
// Gaussian log step
// ==========================================================================

GaussianLogStepKernel::GaussianLogStepKernel(double sigma0, double slope, double sigma_floor)
    : sigma0_(sigma0), slope_(slope), floor_(sigma_floor) {
  if (!(sigma_floor > 0.0)) fail(ErrorKind::Config, "gaussian-log-step: sigma_floor must be positive");
  if (!std::isfinite(sigma0) || !std::isfinite(slope))
    fail(ErrorKind::Config, "gaussian-log-step: sigma0 and slope must be finite");
}

double GaussianLogStepKernel::sigma(double x) const { return std::max(floor_, sigma0_ + slope_ * std::log(x)); }

double GaussianLogStepKernel::density(double x, double y) const {
  if (!(y > 0.0)) return 0.0;
  const double s = sigma(x);
  return normal_pdf((std::log(y / x) + 0.5 * s * s) / s) / (s * y);
}

Support GaussianLogStepKernel::support(double x) const {
  const double s = sigma(x);
  const double center = std::log(x) - 0.5 * s * s;
  return {std::exp(center - 13.0 * s), std::exp(center + 13.0 * s)};
}

double GaussianLogStepKernel::density_moment(double x, double lo, double hi, int power) const {
  const double s = sigma(x);
  auto d = [&](double z, double shift) {
    if (!(z > 0.0)) return -kInf;
    if (z == kInf) return kInf;
    return (std::log(z / x) + shift) / s;
  };
  if (power == 0) return normal_interval(d(lo, 0.5 * s * s), d(hi, 0.5 * s * s));
  return x * normal_interval(d(lo, -0.5 * s * s), d(hi, -0.5 * s * s));
}

double GaussianLogStepKernel::sample_density(double x, RandomStream& rng) const {
  const double s = sigma(x);
  return x * std::exp(s * rng.normal() - 0.5 * s * s);
}

std::vector<TailBound> GaussianLogStepKernel::analytic_bounds(double epsilon, double x_from) const {
  TailBound bound;
  bound.x_from = x_from;
  bound.epsilon = epsilon;
  bound.source = "analytic:gaussian-log-step";
  if (slope_ == 0.0) {
    // sigma constant: b_eps >= b = Phi(-sigma / 2).
    bound.side = BoundSide::Lower;
    bound.coefficient = normal_cdf(-0.5 * std::max(floor_, sigma0_));
    bound.rate = 0.0;
    return {bound};
  }
  if (slope_ < 0.0) return {};
  // Phi(t) <= exp(-t^2 / 2) / 2 for t <= 0 and t^2 >= sigma^2 / 4 - log(1 + eps) give
  // b_eps <= sqrt(1 + eps) / 2 * exp(-sigma^2 / 8) once sigma >= sqrt(2 log(1 + eps)).
  const double sigma_min = std::max(floor_, std::sqrt(2.0 * std::log1p(epsilon)));
  const double u_min = (sigma_min - sigma0_) / slope_;
  bound.side = BoundSide::Upper;
  bound.shape = BoundShape::Gaussian;
  bound.coefficient = 0.5 * std::sqrt(1.0 + epsilon);
  bound.rate = slope_ * slope_ / 8.0;
  bound.center = -sigma0_ / slope_;
  bound.x_from = std::max(x_from, std::exp(u_min));
  return {bound};
}

}  // namespace bubbles
