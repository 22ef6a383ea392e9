#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bubbles/builtin_kernels.hpp"
#include "bubbles/error.hpp"
#include "bubbles/montecarlo.hpp"

namespace bubbles {
namespace {

// ==========================================================================
// Drawdown detection
// ==========================================================================

TEST(drawdown_indices, strict_decreases_only) {
  const std::vector<double> path{1.0, 1.5, 1.5, 1.2, 2.0, 0.1, 0.1};
  EXPECT_EQ(drawdown_indices(path), (std::vector<std::size_t>{3, 5}));
}

PathBatch hand_batch() {
  PathBatch b;
  b.x0 = 1.0;
  b.horizon = 4;
  b.paths = {{1.0, 2.0, 1.0, 3.0, 2.0}, {1.0, 1.0, 2.0, 4.0, 8.0}, {1.0, 0.5, 0.5, 0.5, 0.5}};
  b.hold = {HoldReason::None, HoldReason::None, HoldReason::None};
  return b;
}

TEST(drawdowns, record_fields_on_hand_paths) {
  const auto b = hand_batch();
  const auto r = drawdowns(b, 2, 1.0, 0);
  EXPECT_EQ(r.tau[0], (std::vector<std::size_t>{2, 4}));
  EXPECT_TRUE(r.tau[1].empty());
  EXPECT_EQ(r.tau[2], (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.tau_tilde[1], 5u);
  EXPECT_FALSE(r.run_flag[0]);
  EXPECT_TRUE(r.run_flag[1]);
  EXPECT_FALSE(r.run_flag[2]);
  EXPECT_TRUE(r.censored(1, 1));
  EXPECT_TRUE(r.censored(2, 2));
}

TEST(estimators, hand_paths_give_exact_means) {
  const auto b = hand_batch();
  const auto r = drawdowns(b, 2, 1.0, 0);
  // S_{tau_1 ^ 4}: 1.0, 8.0, 0.5.
  const auto sv = estimate_stopped_value(b, r, 1);
  EXPECT_NEAR(sv.estimate, 9.5 / 3.0, 1e-15);
  EXPECT_NEAR(estimate_mass_loss(b, r, 1).estimate, 1.0 - 9.5 / 3.0, 1e-15);
  // S_4 1{run}: only path 1.
  EXPECT_NEAR(estimate_monotone_run(b, r).estimate, 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(estimate_terminal_mean(b).estimate, 10.5 / 3.0, 1e-15);
  EXPECT_NEAR(estimate_stopped_value(b, r, 1, 2).estimate, (1.0 + 2.0 + 0.5) / 3.0, 1e-15);
}

TEST(estimators, mean_estimate_standard_error) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = mean_estimate(v, "x");
  EXPECT_DOUBLE_EQ(e.estimate, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(e.n_effective, 4u);
}

TEST(estimators, horizon_beyond_batch_is_rejected) {
  const auto b = hand_batch();
  const auto r = drawdowns(b, 1);
  EXPECT_THROW(estimate_mass_loss(b, r, 1, 9), Error);
}

// ==========================================================================
// Simulation
// ==========================================================================

TEST(simulate, absorbing_doubling_loses_half) {
  const AbsorbingDoublingKernel k(0.5);
  const KernelPathModel model(k);
  const auto batch = simulate(model, 1.0, 60, 20000, 2024);
  const auto e = estimate_mass_loss(batch, drawdowns(batch, 1), 1);
  EXPECT_DOUBLE_EQ(e.estimate, 0.5);
  EXPECT_EQ(e.std_error, 0.0);
  for (auto h : batch.hold) EXPECT_EQ(h, HoldReason::Absorbed);
}

TEST(simulate, reproducible_and_thread_independent) {
  const UniformDoublingKernel k;
  const KernelPathModel model(k);
  SimulationOptions one, four;
  four.threads = 4;
  const auto a = simulate(model, 1.0, 20, 500, 77, one);
  const auto b = simulate(model, 1.0, 20, 500, 77, four);
  const auto c = simulate(model, 1.0, 20, 500, 78, one);
  EXPECT_EQ(a.paths, b.paths);
  EXPECT_NE(a.paths, c.paths);
}

TEST(simulate, batch_prefix_is_stable_in_path_count) {
  const UniformDoublingKernel k;
  const KernelPathModel model(k);
  const auto small = simulate(model, 1.0, 10, 50, 3);
  const auto large = simulate(model, 1.0, 10, 200, 3);
  for (std::size_t p = 0; p < small.size(); ++p) EXPECT_EQ(small.paths[p], large.paths[p]);
}

TEST(simulate, frozen_paths_block_terminal_mean) {
  const UniformDoublingKernel k;
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 1;
  const auto b = simulate(model, 1.0, 30, 200, 9, opt);
  bool any_frozen = false;
  for (auto h : b.hold) any_frozen |= h == HoldReason::Frozen;
  EXPECT_TRUE(any_frozen);
  EXPECT_THROW(estimate_terminal_mean(b), Error);
  EXPECT_NO_THROW(estimate_mass_loss(b, drawdowns(b, 1), 1));
}

TEST(simulate, binomial_martingale_has_no_mass_loss) {
  const TwoPointCompleteKernel k(0.5, 0.25, 0.0, 0.25);
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 1;
  const auto b = simulate(model, 1.0, 60, 50000, 12, opt);
  const auto e = estimate_mass_loss(b, drawdowns(b, 1), 1);
  EXPECT_LE(std::abs(e.estimate), 4.0 * e.std_error + 1e-12);
  const auto ladder = mass_loss_ladder(b, drawdowns(b, 1), 1, std::vector<std::size_t>{1, 10, 60});
  ASSERT_EQ(ladder.size(), 3u);
  EXPECT_EQ(ladder_csv(ladder).rows.size(), 3u);
}

TEST(simulate, terminal_mean_is_martingale) {
  const GaussianLogStepKernel k(0.3, 0.0, 0.1);
  const KernelPathModel model(k);
  const auto b = simulate(model, 2.0, 10, 40000, 4);
  const auto e = estimate_terminal_mean(b);
  EXPECT_NEAR(e.estimate, 2.0, 4.0 * e.std_error);
}

// ==========================================================================
// Serialization
// ==========================================================================

TEST(path_batch, csv_round_trip) {
  const UniformDoublingKernel k;
  const KernelPathModel model(k);
  SimulationOptions opt;
  opt.stop_after_drawdowns = 2;
  const auto b = simulate(model, 1.0, 8, 40, 5, opt);
  const auto back = path_batch_from_csv(parse_csv(format_csv(to_csv(b))), 1.0, 5, model.name(), b.horizon);
  EXPECT_EQ(back.paths, b.paths);
  EXPECT_EQ(back.hold, b.hold);
  EXPECT_EQ(back.horizon, b.horizon);
}

TEST(drawdown_estimate, json_round_trip) {
  DrawdownEstimate e{"mass-loss", 0.5, 0.001, 100, 60, 100, 42, 1, 0.0};
  const auto back = drawdown_estimate_from_json(to_json(e));
  EXPECT_EQ(back.estimand, e.estimand);
  EXPECT_EQ(back.estimate, e.estimate);
  EXPECT_EQ(back.std_error, e.std_error);
  EXPECT_EQ(back.n_effective, e.n_effective);
  EXPECT_EQ(back.horizon, e.horizon);
  EXPECT_EQ(back.seed, e.seed);
}

}  // namespace
}  // namespace bubbles
