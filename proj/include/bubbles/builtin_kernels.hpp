#pragma once

#include <string>
#include <vector>

#include "bubbles/kernel.hpp"

namespace bubbles {

/// Complete two-point kernel with constant a and b(x) = min(b_max, c x^(-p)).
/// (a, c, p, b_max) = (1/2, 1/4, 0, 1/4) is the binomial model u = 3/2, d = 1/2.
class TwoPointCompleteKernel final : public MarkovKernel {
 public:
  TwoPointCompleteKernel(double a, double c, double p, double b_max);

  KernelKind kind() const override { return KernelKind::TwoPointComplete; }
  std::string name() const override { return "two-point-complete"; }
  std::vector<Atom> atoms(double x) const override;
  std::optional<TwoPointForm> two_point_form(double x) const override;
  std::vector<TailBound> analytic_bounds(double epsilon, double x_from) const override;

  double b(double x) const;

 private:
  double a_, c_, p_, b_max_;
};

/// Jump to `level` or to 2x - level with probability 1/2 each while x > level;
/// absorbed at x <= level. level = 1/2 is the first complete-market example.
class AbsorbingDoublingKernel final : public MarkovKernel {
 public:
  explicit AbsorbingDoublingKernel(double level = 0.5);

  KernelKind kind() const override { return KernelKind::AbsorbingDoubling; }
  std::string name() const override { return "absorbing-doubling"; }
  std::vector<Atom> atoms(double x) const override;
  std::optional<TwoPointForm> two_point_form(double x) const override;
  std::vector<TailBound> analytic_bounds(double epsilon, double x_from) const override;

  double level() const { return level_; }

 private:
  double level_;
};

/// Smooth version of the doubling kernel: for x > 1, density 1/2 on (0, 1) and
/// on (2x - 1, 2x); for x <= 1, uniform on (0, 2x).
class UniformDoublingKernel final : public MarkovKernel {
 public:
  KernelKind kind() const override { return KernelKind::UniformDoubling; }
  std::string name() const override { return "uniform-doubling"; }
  std::vector<Atom> atoms(double) const override { return {}; }
  double density(double x, double y) const override;
  Support support(double x) const override { return {0.0, 2.0 * x}; }
  std::vector<double> breakpoints(double x) const override;
  double density_moment(double x, double lo, double hi, int power) const override;
  double sample_density(double x, RandomStream& rng) const override;
  std::vector<TailBound> analytic_bounds(double epsilon, double x_from) const override;
};

/// Upper part k(x, y) = c / (x + 1) on [x, 2x], completed below the diagonal by
/// one atom matching the residual mass and mean. c = 2/3 is the call-subsolution example.
class AffineDropKernel final : public MarkovKernel {
 public:
  explicit AffineDropKernel(double coefficient = 2.0 / 3.0);

  KernelKind kind() const override { return KernelKind::AffineDrop; }
  std::string name() const override { return "affine-drop"; }
  std::vector<Atom> atoms(double x) const override;
  double density(double x, double y) const override;
  Support support(double x) const override { return {x, 2.0 * x}; }
  double density_moment(double x, double lo, double hi, int power) const override;
  double sample_density(double x, RandomStream& rng) const override;

  double coefficient() const { return c_; }

 private:
  double c_;
};

/// Upper part k(x, y) = (e/2) (1 - e^-x) / (1 - e^-y) (1/x) e^(-y/x) for y >= x,
/// completed below the diagonal by one atom. Its default function is x (1 - e^-x).
class ExponentialRatioKernel final : public MarkovKernel {
 public:
  KernelKind kind() const override { return KernelKind::ExponentialRatio; }
  std::string name() const override { return "exponential-ratio"; }
  std::vector<Atom> atoms(double x) const override;
  double density(double x, double y) const override;
  Support support(double x) const override { return {x, kTailRatio * x}; }
  double sample_density(double x, RandomStream& rng) const override;

  /// Mass and first moment of the upper part.
  double upper_mass(double x) const;
  double upper_mean(double x) const;

  static constexpr double kTailRatio = 60.0;
};

/// Log-price step S_1 = x exp(sigma Z - sigma^2 / 2) with
/// sigma(u) = max(sigma_floor, sigma0 + slope u), u = log x.
class GaussianLogStepKernel final : public MarkovKernel {
 public:
  GaussianLogStepKernel(double sigma0, double slope, double sigma_floor);

  KernelKind kind() const override { return KernelKind::GaussianLogStep; }
  std::string name() const override { return "gaussian-log-step"; }
  std::vector<Atom> atoms(double) const override { return {}; }
  double density(double x, double y) const override;
  Support support(double x) const override;
  double density_moment(double x, double lo, double hi, int power) const override;
  double sample_density(double x, RandomStream& rng) const override;
  std::vector<TailBound> analytic_bounds(double epsilon, double x_from) const override;

  double sigma(double x) const;

 private:
  double sigma0_, slope_, floor_;
};

/// delta_x: the constant chain.
class DegenerateKernel final : public MarkovKernel {
 public:
  KernelKind kind() const override { return KernelKind::Degenerate; }
  std::string name() const override { return "degenerate"; }
  std::vector<Atom> atoms(double x) const override { return {{x, 1.0}}; }
};

}  // namespace bubbles
