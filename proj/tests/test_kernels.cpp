#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "bubbles/builtin_kernels.hpp"
#include "bubbles/error.hpp"
#include "bubbles/kernel.hpp"
#include "bubbles/quadrature.hpp"
#include "bubbles/random.hpp"
#include "bubbles/special.hpp"
#include "bubbles/tabulated_kernel.hpp"

namespace bubbles {
namespace {

// Independent oracle for b_eps: direct quadrature of y k(x, y) / x plus atoms.
double recovery_oracle(const MarkovKernel& k, double x, double eps, double lo = 0.0) {
  double s = 0.0;
  for (const Atom& at : k.atoms(x))
    if (at.location < x * (1.0 + eps)) s += at.weight * at.location;
  const Support sup = k.support(x);
  const double hi = std::min(sup.hi, x * (1.0 + eps));
  const double from = std::max(lo, sup.lo);
  if (!sup.empty() && hi > from) {
    const auto br = k.breakpoints(x);
    s += integrate([&](double y) { return y * k.density(x, y); }, from, hi, br).value;
  }
  return s / x;
}

std::vector<double> probe_states() { return {0.05, 0.3, 0.9, 1.0, 1.7, 4.0, 25.0, 300.0}; }

// ==========================================================================
// Martingale invariants for every built-in kernel
// ==========================================================================

class builtin_kernel : public ::testing::TestWithParam<int> {
 protected:
  std::unique_ptr<MarkovKernel> make() const {
    switch (GetParam()) {
      case 0: return std::make_unique<TwoPointCompleteKernel>(0.5, 0.25, 1.0, 0.25);
      case 1: return std::make_unique<AbsorbingDoublingKernel>(0.5);
      case 2: return std::make_unique<UniformDoublingKernel>();
      case 3: return std::make_unique<AffineDropKernel>();
      case 4: return std::make_unique<ExponentialRatioKernel>();
      case 5: return std::make_unique<GaussianLogStepKernel>(0.5, 0.3, 0.2);
      default: return std::make_unique<DegenerateKernel>();
    }
  }
};

TEST_P(builtin_kernel, mass_one_and_mean_x) {
  const auto k = make();
  for (double x : probe_states()) {
    const auto c = check_kernel(*k, x);
    EXPECT_NEAR(c.mass, 1.0, 1e-9) << k->name() << " x=" << x;
    EXPECT_NEAR(c.mean / x, 1.0, 1e-9) << k->name() << " x=" << x;
    EXPECT_NO_THROW(validate_kernel(*k, x));
  }
}

TEST_P(builtin_kernel, recovery_bounded_by_down_probability) {
  const auto k = make();
  for (double x : probe_states()) {
    const double a = probability_down(*k, x);
    const double b = relative_recovery(*k, x);
    EXPECT_GE(a, -1e-15);
    EXPECT_LE(a, 1.0 + 1e-12);
    EXPECT_GE(b, -1e-15);
    EXPECT_LE(b, a + 1e-12) << k->name() << " x=" << x;
    EXPECT_LE(b, relative_recovery(*k, x, 0.5) + 1e-12);
  }
}

TEST_P(builtin_kernel, sampler_mean_is_x) {
  const auto k = make();
  for (double x : {0.7, 3.0}) {
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int p = 0; p < n; ++p) {
      RandomStream rng(11, static_cast<std::uint64_t>(p));
      const double y = sample_step(*k, x, rng);
      ASSERT_GE(y, 0.0);
      sum += y;
      sq += y * y;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
    EXPECT_NEAR(mean, x, 4.0 * se + 1e-12) << k->name();
  }
}

INSTANTIATE_TEST_SUITE_P(kernels, builtin_kernel, ::testing::Range(0, 7));

// ==========================================================================
// Closed-form a and b_eps
// ==========================================================================

TEST(uniform_doubling, recovery_matches_closed_form) {
  const UniformDoublingKernel k;
  for (double eps : {0.1, 0.5, 0.9}) {
    const double q = (1.0 + eps) * (1.0 + eps) / 4.0;
    for (double x : {0.3, 1.0, 1.05, 1.0 / (1.0 - eps) * 0.99, 1.0 / (1.0 - eps) * 1.01, 7.0, 100.0}) {
      double expected = 0.0;
      if (x <= 1.0)
        expected = q;
      else if (x <= 1.0 / (1.0 - eps))
        expected = 1.0 - x * (1.0 - q);
      else
        expected = 0.25 / x;
      EXPECT_NEAR(relative_recovery(k, x, eps), expected, 1e-12) << "x=" << x << " eps=" << eps;
      EXPECT_NEAR(probability_down(k, x), 0.5, 1e-14);
    }
  }
}

TEST(gaussian_log_step, recovery_matches_closed_form) {
  const GaussianLogStepKernel k(0.4, 0.5, 0.1);
  for (double x : {0.5, 1.0, 3.0, 50.0, 1e4}) {
    const double s = k.sigma(x);
    EXPECT_NEAR(s, std::max(0.1, 0.4 + 0.5 * std::log(x)), 1e-15);
    EXPECT_NEAR(probability_down(k, x), normal_cdf(s / 2.0), 1e-12);
    for (double eps : {0.0, 1.0})
      EXPECT_NEAR(relative_recovery(k, x, eps), normal_cdf(std::log1p(eps) / s - s / 2.0), 1e-12);
  }
}

TEST(two_point_complete, atoms_reproduce_a_and_b) {
  const TwoPointCompleteKernel k(0.4, 0.3, 0.5, 0.2);
  for (double x : {0.5, 2.25, 9.0, 400.0}) {
    const double b = std::min(0.2, 0.3 / std::sqrt(x));
    EXPECT_NEAR(probability_down(k, x), 0.4, 1e-15);
    EXPECT_NEAR(relative_recovery(k, x), b, 1e-15);
    ASSERT_TRUE(k.two_point_form(x).has_value());
    EXPECT_NEAR(k.two_point_form(x)->b, b, 1e-15);
  }
  EXPECT_THROW(TwoPointCompleteKernel(0.4, 0.3, 0.5, 0.5), Error);
}

TEST(absorbing_doubling, halves_and_absorbs) {
  const AbsorbingDoublingKernel k(0.5);
  EXPECT_NEAR(probability_down(k, 3.0), 0.5, 1e-15);
  EXPECT_NEAR(relative_recovery(k, 3.0), 0.25 / 3.0, 1e-15);
  const auto atoms = k.atoms(0.4);
  ASSERT_EQ(atoms.size(), 1u);
  EXPECT_EQ(atoms[0].location, 0.4);
  EXPECT_EQ(probability_down(k, 0.4), 0.0);
}

TEST(affine_drop, upper_part_and_completion_atom) {
  const AffineDropKernel k(2.0 / 3.0);
  for (double x : {0.5, 3.0, 6.0}) {
    EXPECT_NEAR(k.density_moment(x, 0.0, 1e9, 0), (2.0 / 3.0) * x / (x + 1.0), 1e-15);
    EXPECT_NEAR(probability_down(k, x), 1.0 - (2.0 / 3.0) * x / (x + 1.0), 1e-15);
    EXPECT_NEAR(relative_recovery(k, x), recovery_oracle(k, x, 0.0), 1e-13);
  }
}

TEST(exponential_ratio, recovery_matches_quadrature_oracle) {
  const ExponentialRatioKernel k;
  for (double x : {0.05, 1.0, 10.0}) {
    EXPECT_NEAR(relative_recovery(k, x, 1.0), recovery_oracle(k, x, 1.0), 1e-10);
    // Upper mass from the displayed density.
    const double e = std::exp(1.0);
    const double up = integrate(
        [&](double y) { return 0.5 * e * (-std::expm1(-x)) / (-std::expm1(-y)) / x * std::exp(-y / x); }, x,
        60.0 * x).value;
    EXPECT_NEAR(k.upper_mass(x), up, 1e-10);
  }
}

TEST(analytic_bounds, hold_on_the_tail_grid) {
  const UniformDoublingKernel u;
  const GaussianLogStepKernel g(0.0, 1.0, 0.5);
  const TwoPointCompleteKernel t(0.5, 0.25, 1.0, 0.25);
  const std::vector<const MarkovKernel*> ks{&u, &g, &t};
  for (const MarkovKernel* k : ks) {
    for (const TailBound& b : k->analytic_bounds(0.5, 10.0)) {
      for (double x = b.x_from; x < 1e5; x *= 1.7) {
        const double v = relative_recovery(*k, x, b.epsilon);
        if (b.side == BoundSide::Upper)
          EXPECT_LE(v, b(x) + 1e-12) << k->name() << " x=" << x;
        else
          EXPECT_GE(v, b(x) - 1e-12) << k->name() << " x=" << x;
      }
    }
  }
}

// ==========================================================================
// Sampling helpers
// ==========================================================================

TEST(sampling, uniform_layout_puts_atoms_first) {
  const TwoPointCompleteKernel k(0.5, 0.25, 0.0, 0.25);
  EXPECT_NEAR(sample_step_from_uniform(k, 1.0, 0.1), 0.5, 1e-15);
  EXPECT_NEAR(sample_step_from_uniform(k, 1.0, 0.9), 1.5, 1e-15);
}

TEST(sampling, density_inverse_cdf_roundtrip) {
  const AffineDropKernel k;
  const double x = 2.0;
  const double mass = k.density_moment(x, 0.0, 1e9, 0);
  for (double t : {0.1, 0.5, 0.9}) {
    const double y = invert_density_cdf(k, x, t * mass);
    EXPECT_NEAR(density_cdf(k, x, y), t * mass, 1e-9);
  }
  EXPECT_THROW(invert_density_cdf(k, x, 2.0 * mass), Error);
}

// ==========================================================================
// Tabulated user kernels
// ==========================================================================

TabulatedKernel uniform_table() {
  // Uniform on (0, 2x) at x = 1 and x = 2.
  return TabulatedKernel({{1.0, {0.0, 2.0}, {0.5, 0.5}}, {2.0, {0.0, 4.0}, {0.25, 0.25}}});
}

TEST(tabulated_kernel, uniform_rows_give_half_and_quarter) {
  const TabulatedKernel k = uniform_table();
  for (double x : {0.5, 1.0, 1.5, 2.0, 8.0}) {
    if (x != 1.5) {
      EXPECT_NEAR(probability_down(k, x), 0.5, 1e-12) << x;
      EXPECT_NEAR(relative_recovery(k, x), 0.25, 1e-12) << x;
    }
    const auto c = check_kernel(k, x);
    EXPECT_NEAR(c.mass, 1.0, 1e-12);
    EXPECT_NEAR(c.mean, x, 1e-12 * x);
  }
}

TEST(tabulated_kernel, interpolates_rows_as_a_mixture) {
  // Half U(0, 2) and half U(0, 4) at x = 1.5.
  const TabulatedKernel k = uniform_table();
  EXPECT_NEAR(probability_down(k, 1.5), 0.5 * 0.75 + 0.5 * 0.375, 1e-12);
  EXPECT_NEAR(relative_recovery(k, 1.5), (0.5 * 1.5 * 1.5 / 4.0 + 0.5 * 1.5 * 1.5 / 8.0) / 1.5, 1e-12);
}

TEST(tabulated_kernel, rejects_non_martingale_rows) {
  EXPECT_THROW(TabulatedKernel({{1.0, {0.0, 1.0}, {1.0, 1.0}}}), Error);
}

TEST(tabulated_kernel, loads_from_csv) {
  const auto path = std::filesystem::temp_directory_path() / "bubbles_tabulated_kernel.csv";
  {
    std::ofstream f(path);
    f << "# uniform on (0, 2x)\nx,y,k\n1,0,0.5\n1,2,0.5\n2,0,0.25\n2,4,0.25\n";
  }
  const TabulatedKernel k = TabulatedKernel::from_csv(path);
  EXPECT_EQ(k.rows().size(), 2u);
  EXPECT_NEAR(relative_recovery(k, 2.0), 0.25, 1e-12);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bubbles
