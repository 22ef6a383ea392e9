#include "bubbles/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bubbles/error.hpp"
#include "bubbles/quadrature.hpp"

namespace bubbles {

const char* to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::TwoPointComplete: return "two-point-complete";
    case KernelKind::AbsorbingDoubling: return "absorbing-doubling";
    case KernelKind::UniformDoubling: return "uniform-doubling";
    case KernelKind::AffineDrop: return "affine-drop";
    case KernelKind::ExponentialRatio: return "exponential-ratio";
    case KernelKind::GaussianLogStep: return "gaussian-log-step";
    case KernelKind::InverseBessel: return "inverse-bessel-discretized";
    case KernelKind::Degenerate: return "degenerate";
    case KernelKind::UserDefined: return "user-defined";
  }
  return "unknown";
}

double MarkovKernel::density_moment(double x, double lo, double hi, int power) const {
  const Support s = support(x);
  if (s.empty()) return 0.0;
  lo = std::max(lo, s.lo);
  hi = std::min(hi, s.hi);
  if (!(hi > lo)) return 0.0;
  const auto breaks = breakpoints(x);
  auto f = [&](double y) {
    const double k = density(x, y);
    return power == 0 ? k : y * k;
  };
  if (lo > 0.0) return integrate_log(f, lo, hi, breaks).value;
  return integrate(f, lo, hi, breaks).value;
}

double MarkovKernel::sample_density(double x, RandomStream& rng) const {
  const Support s = support(x);
  const double mass = density_moment(x, s.lo, s.hi, 0);
  return invert_density_cdf(*this, x, rng.uniform() * mass);
}

namespace {

// Atom part of the first `power` moment over locations y < cut.
double atom_moment_below(const std::vector<Atom>& atoms, double cut, int power) {
  double sum = 0.0;
  for (const Atom& at : atoms)
    if (at.location < cut) sum += power == 0 ? at.weight : at.weight * at.location;
  return sum;
}

void require_state(double x, const char* op) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::Config, std::string(op) + ": state must be positive");
}

}  // namespace

double probability_down(const MarkovKernel& kernel, double x) {
  require_state(x, "probability_down");
  return atom_moment_below(kernel.atoms(x), x, 0) + kernel.density_moment(x, 0.0, x, 0);
}

double relative_recovery(const MarkovKernel& kernel, double x, double epsilon) {
  require_state(x, "relative_recovery");
  if (!(epsilon >= 0.0)) fail(ErrorKind::Config, "relative_recovery: epsilon must be nonnegative");
  const double cut = x * (1.0 + epsilon);
  return (atom_moment_below(kernel.atoms(x), cut, 1) + kernel.density_moment(x, 0.0, cut, 1)) / x;
}

KernelDiagnostics diagnose(const MarkovKernel& kernel, double x, double epsilon) {
  return {x, probability_down(kernel, x), relative_recovery(kernel, x, 0.0), epsilon,
          relative_recovery(kernel, x, epsilon)};
}

KernelCheck check_kernel(const MarkovKernel& kernel, double x) {
  require_state(x, "check_kernel");
  const auto atoms = kernel.atoms(x);
  const double inf = std::numeric_limits<double>::infinity();
  KernelCheck c{x, 0.0, 0.0};
  for (const Atom& at : atoms) {
    if (!(at.location > 0.0) || !(at.weight >= 0.0))
      fail(ErrorKind::Config, std::string(kernel.name()) + ": atom outside (0, inf) or with negative weight");
    c.mass += at.weight;
    c.mean += at.weight * at.location;
  }
  c.mass += kernel.density_moment(x, 0.0, inf, 0);
  c.mean += kernel.density_moment(x, 0.0, inf, 1);
  return c;
}

void validate_kernel(const MarkovKernel& kernel, double x) {
  const KernelCheck c = check_kernel(kernel, x);
  const double tol = 10.0 * kQuadTol;
  if (std::abs(c.mass - 1.0) > tol || std::abs(c.mean - x) > tol * x) {
    std::ostringstream msg;
    msg.precision(15);
    msg << kernel.name() << ": not a martingale kernel at x = " << x << " (mass " << c.mass << ", mean "
        << c.mean << ")";
    fail(ErrorKind::Config, msg.str());
  }
}

double density_cdf(const MarkovKernel& kernel, double x, double z) {
  return kernel.density_moment(x, 0.0, z, 0);
}

double invert_density_cdf(const MarkovKernel& kernel, double x, double target) {
  const Support s = kernel.support(x);
  if (s.empty()) fail(ErrorKind::Support, kernel.name() + ": no density part to sample");
  const double total = kernel.density_moment(x, s.lo, s.hi, 0);
  if (!(target > 0.0)) return s.lo > 0.0 ? s.lo : std::min(s.hi, 1e-300);
  if (target > total * (1.0 + 1e-9) + 1e-300) {
    std::ostringstream msg;
    msg << kernel.name() << ": density CDF cannot bracket target " << target << " (mass on support hint "
        << total << ")";
    fail(ErrorKind::Support, msg.str());
  }
  double lo = s.lo;
  double hi = s.hi;
  const bool log_scale = lo > 0.0;
  for (int it = 0; it < 400 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = log_scale ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (kernel.density_moment(x, s.lo, mid, 0) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double sample_step_from_uniform(const MarkovKernel& kernel, double x, double u) {
  double acc = 0.0;
  for (const Atom& at : kernel.atoms(x)) {
    acc += at.weight;
    if (u < acc) return at.location;
  }
  if (kernel.support(x).empty()) {
    // Rounding left a sliver above the last atom.
    const auto atoms = kernel.atoms(x);
    if (atoms.empty()) fail(ErrorKind::Support, kernel.name() + ": kernel has neither atoms nor density");
    return atoms.back().location;
  }
  return invert_density_cdf(kernel, x, u - acc);
}

double sample_step(const MarkovKernel& kernel, double x, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const auto atoms = kernel.atoms(x);
  for (const Atom& at : atoms) {
    acc += at.weight;
    if (u < acc) return at.location;
  }
  if (kernel.support(x).empty()) {
    if (atoms.empty()) fail(ErrorKind::Support, kernel.name() + ": kernel has neither atoms nor density");
    return atoms.back().location;
  }
  return kernel.sample_density(x, rng);
}

}  // namespace bubbles
