#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bubbles/kernel.hpp"
#include "bubbles/montecarlo.hpp"
#include "bubbles/random.hpp"

namespace bubbles {

// ==========================================================================
// Inverse Bessel kernel under the relative-barrier schedule
// ==========================================================================

/// Weight (2 / (1 + beta)) Phi(-beta / ((1 + beta) x sqrt(alpha))) of the up-barrier atom.
double bessel_atom_weight(double x, double alpha, double beta);

/// P_x[S_1 <= z] for 0 < z < (1 + beta) x in closed form; 1 at and above the barrier.
double bessel_cdf(double x, double alpha, double beta, double z);

/// Same quantity by adaptive quadrature of the kernel density (cross-check).
double bessel_cdf_by_quadrature(double x, double alpha, double beta, double z);

/// K(x, dy) = w delta_{(1 + beta) x} + density on (0, (1 + beta) x).
class InverseBesselKernel final : public MarkovKernel {
 public:
  InverseBesselKernel(double alpha, double beta);

  KernelKind kind() const override { return KernelKind::InverseBessel; }
  std::string name() const override { return "inverse-bessel-discretized"; }
  std::vector<Atom> atoms(double x) const override;
  double density(double x, double y) const override;
  Support support(double x) const override;
  double density_moment(double x, double lo, double hi, int power) const override;
  /// Bisection on the closed-form cdf.
  double sample_density(double x, RandomStream& rng) const override;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_, beta_;
};

/// One step of the chain: the atom with its weight, else inverse-CDF bisection
/// on bessel_cdf to relative tolerance 1e-10.
double sample_bessel_step(double x, double alpha, double beta, RandomStream& rng);

/// Inverse-transform step for a given uniform u: u below the atom weight gives (1 + beta) x.
double bessel_step_from_uniform(double x, double alpha, double beta, double u);

// ==========================================================================
// Schedules and drivers
// ==========================================================================

/// Stopping-time schedule:
///   deterministic barriers: tau_n = inf{t : X_t >= b_n} ^ a_n
///   relative barrier:       tau_n = inf{t >= tau_{n-1} : X_t >= (1 + beta) X_{tau_{n-1}}} ^ (tau_{n-1} + alpha)
struct DiscretizationSchedule {
  enum class Variant { DeterministicBarrier, RelativeBarrier };
  Variant variant = Variant::RelativeBarrier;
  double alpha = 1.0;
  double beta = 1.0;
  /// Explicit sequences (deterministic variant); beyond their length a_n = n and b_n = b0 2^n.
  std::vector<double> a_seq;
  std::vector<double> b_seq;
  double b0 = 2.0;

  static DiscretizationSchedule relative(double alpha, double beta);
  static DiscretizationSchedule deterministic(std::vector<double> a_seq = {}, std::vector<double> b_seq = {},
                                              double b0 = 2.0);

  double a(std::size_t n) const;
  double b(std::size_t n) const;
  /// Throws Config unless alpha, beta > 0 or the sequences are strictly increasing and positive.
  void validate() const;
};

struct SegmentResult {
  double x = 0.0;
  double elapsed = 0.0;
  bool hit = false;
  bool exploded = false;
  bool nonpositive = false;
};

/// Continuous positive local martingale advanced over one schedule segment.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual std::string name() const = 0;
  /// Run from x for at most `budget` time units or until X >= barrier (barrier
  /// may be +inf). `need_time` asks for the hitting time at substep resolution;
  /// without it an exact driver may cover the budget in one step.
  virtual SegmentResult run(double x, double budget, double barrier, double dt, bool need_time,
                            RandomStream& rng) const = 0;
};

/// X = 1/R with R = |B| for a three-dimensional Brownian motion B. Radial
/// steps R'^2 = (R + sqrt(h) Z)^2 + 2 h E are exact; h = dt near the barrier and
/// grows to ((R - 1/barrier) / 4)^2 away from it. The bridge correction uses the
/// exact crossing probability of the radial bridge; without it crossings are
/// detected at step ends only.
class InverseBesselDriver final : public Driver {
 public:
  explicit InverseBesselDriver(bool bridge_correction = true) : bridge_(bridge_correction) {}
  std::string name() const override { return "inverse-bessel"; }
  SegmentResult run(double x, double budget, double barrier, double dt, bool need_time,
                    RandomStream& rng) const override;

 private:
  bool bridge_;
};

/// dX = sigma X dW, simulated exactly in log scale with an exact bridge crossing test.
class GeometricBrownianDriver final : public Driver {
 public:
  explicit GeometricBrownianDriver(double sigma = 1.0);
  std::string name() const override { return "geometric-brownian"; }
  SegmentResult run(double x, double budget, double barrier, double dt, bool need_time,
                    RandomStream& rng) const override;

 private:
  double sigma_;
};

/// dX = scale X^power dW by Euler-Maruyama; flags nonpositive and exploding paths.
class EulerDiffusionDriver final : public Driver {
 public:
  EulerDiffusionDriver(double scale, double power);
  std::string name() const override { return "euler-diffusion"; }
  SegmentResult run(double x, double budget, double barrier, double dt, bool need_time,
                    RandomStream& rng) const override;

 private:
  double scale_, power_;
};

struct DiscretizationResult {
  PathBatch batch;
  std::size_t exploded = 0;
  std::size_t nonpositive = 0;
};

struct DiscretizeOptions {
  /// Substep; 0 selects 1e-4 alpha (relative) or 1e-4 (deterministic).
  double dt = 0.0;
  SimulationOptions simulation;
};

/// Records S_n = X_{tau_n} for n = 0..steps along the schedule for N paths.
DiscretizationResult discretize_sde_path(const Driver& driver, const DiscretizationSchedule& schedule, double x0,
                                         std::size_t steps, std::size_t paths, std::uint64_t seed,
                                         const DiscretizeOptions& options = {});

struct BesselBubbleReport {
  DrawdownEstimate mass_loss;
  std::vector<DrawdownEstimate> run_ladder;
  double atom_weight = 0.0;
};

/// Chains sample_bessel_step from x0 and reports the mass lost at the first
/// drawdown together with the monotone-run ladder (k = 0, threshold x0).
BesselBubbleReport bessel_bubble_report(double x0, double alpha, double beta, std::size_t n, std::size_t paths,
                                        std::uint64_t seed, unsigned threads = 1);

/// Two-sample Kolmogorov-Smirnov distance (ties handled exactly).
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical distance of the two-sample test at the given level.
double ks_critical_value(std::size_t n, std::size_t m, double level);

}  // namespace bubbles
