#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bubbles/certificates.hpp"
#include "bubbles/random.hpp"

namespace bubbles {

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

/// Interval [lo, hi] outside which the density part carries no mass above the
/// truncation tolerance. lo >= hi means the kernel has no density part at x.
struct Support {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

enum class KernelKind {
  TwoPointComplete,
  AbsorbingDoubling,
  UniformDoubling,
  AffineDrop,
  ExponentialRatio,
  GaussianLogStep,
  InverseBessel,
  Degenerate,
  UserDefined,
};

const char* to_string(KernelKind kind) noexcept;

/// Coefficients of the complete two-point kernel
/// a(x) delta_{b(x) x / a(x)} + (1 - a(x)) delta_{(1 - b(x)) x / (1 - a(x))}.
struct TwoPointForm {
  double a = 0.0;
  double b = 0.0;
};

/// One-step transition law K(x, dy) on (0, inf): finitely many atoms plus a
/// density part. Implementations are immutable and thread-safe.
class MarkovKernel {
 public:
  virtual ~MarkovKernel() = default;

  virtual KernelKind kind() const = 0;
  virtual std::string name() const = 0;

  virtual std::vector<Atom> atoms(double x) const = 0;
  virtual double density(double /*x*/, double /*y*/) const { return 0.0; }
  virtual Support support(double /*x*/) const { return {}; }
  /// Points in the support where the density jumps or has a kink.
  virtual std::vector<double> breakpoints(double /*x*/) const { return {}; }

  /// Integral of y^power * density(x, y) over (lo, hi), power in {0, 1}.
  virtual double density_moment(double x, double lo, double hi, int power) const;

  /// Draw from the normalized density part.
  virtual double sample_density(double x, RandomStream& rng) const;

  /// Set when K(x, .) belongs to the complete two-point family at x.
  virtual std::optional<TwoPointForm> two_point_form(double /*x*/) const { return std::nullopt; }

  /// Closed-form bounds on b_eps that hold on [x_from, inf) by construction.
  virtual std::vector<TailBound> analytic_bounds(double /*epsilon*/, double /*x_from*/) const { return {}; }
};

struct KernelDiagnostics {
  double x = 0.0;
  double a = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  double b_eps = 0.0;
};

struct KernelCheck {
  double x = 0.0;
  double mass = 0.0;
  double mean = 0.0;
};

/// a(x) = P_x[S_1 < x].
double probability_down(const MarkovKernel& kernel, double x);

/// b_eps(x) = E_x[(S_1 / x) 1{S_1 < x (1 + eps)}]; eps = 0 gives b(x).
double relative_recovery(const MarkovKernel& kernel, double x, double epsilon = 0.0);

KernelDiagnostics diagnose(const MarkovKernel& kernel, double x, double epsilon);

/// Total mass and mean of K(x, .).
KernelCheck check_kernel(const MarkovKernel& kernel, double x);

/// Throws Config if mass or mean is off by more than 10 quadtol (relative for the mean).
void validate_kernel(const MarkovKernel& kernel, double x);

/// Mass of the density part on (0, z].
double density_cdf(const MarkovKernel& kernel, double x, double z);

/// Inverse of density_cdf by bracketing and bisection; `target` in (0, density mass).
double invert_density_cdf(const MarkovKernel& kernel, double x, double target);

/// One draw from K(x, .).
double sample_step(const MarkovKernel& kernel, double x, RandomStream& rng);

/// Inverse-transform step for a given uniform u: atoms are laid out first in
/// the order returned by atoms(x), then the density part.
double sample_step_from_uniform(const MarkovKernel& kernel, double x, double u);

}  // namespace bubbles
