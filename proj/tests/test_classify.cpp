#include <gtest/gtest.h>

#include <cmath>

#include "bubbles/builtin_kernels.hpp"
#include "bubbles/classify.hpp"
#include "bubbles/ctdiscretize.hpp"
#include "bubbles/error.hpp"

namespace bubbles {
namespace {

ClassifyOptions defaults() {
  ClassifyOptions o;
  o.tail = {10.0, 1e4, 60};
  return o;
}

// ==========================================================================
// Built-in kernels through the certified routes
// ==========================================================================

TEST(classify, binomial_is_no_bubble_by_recovery_floor) {
  const TwoPointCompleteKernel k(0.5, 0.25, 0.0, 0.25);
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::NoBubble);
  EXPECT_EQ(v.criterion, "recovery-floor");
}

TEST(classify, decaying_two_point_is_bubble) {
  const TwoPointCompleteKernel k(0.5, 0.25, 1.0, 0.25);
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::Bubble);
  EXPECT_EQ(v.criterion, "complete-two-point");
  EXPECT_GT(v.evidence.at("tail_integral_bound"), 0.0);
}

TEST(classify, absorbing_doubling_is_bubble) {
  const AbsorbingDoublingKernel k(0.5);
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::Bubble);
  EXPECT_EQ(v.criterion, "complete-two-point");
}

TEST(classify, two_point_without_bounds_is_indeterminate) {
  const TwoPointCompleteKernel k(0.5, 0.25, 1.0, 0.25);
  ClassifyOptions o = defaults();
  o.use_analytic_bounds = false;
  const auto v = classify_markov_bubble(k, o);
  EXPECT_EQ(v.verdict, Verdict::Indeterminate);
}

TEST(classify, uniform_doubling_is_bubble_by_integrable_recovery) {
  const UniformDoublingKernel k;
  ClassifyOptions o = defaults();
  o.epsilon = 0.5;
  const auto v = classify_markov_bubble(k, o);
  EXPECT_EQ(v.verdict, Verdict::Bubble);
  EXPECT_EQ(v.criterion, "integrable-recovery");
}

TEST(classify, gaussian_log_step_growing_sigma_is_bubble) {
  const GaussianLogStepKernel k(0.0, 1.0, 0.5);
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::Bubble);
  EXPECT_EQ(v.criterion, "integrable-recovery");
}

TEST(classify, gaussian_log_step_constant_sigma_is_no_bubble) {
  const GaussianLogStepKernel k(0.8, 0.0, 0.1);
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::NoBubble);
  EXPECT_EQ(v.criterion, "recovery-floor");
  EXPECT_NEAR(v.evidence.at("b_floor"), 0.5 * std::erfc(0.4 / std::sqrt(2.0)), 1e-15);
}

// ==========================================================================
// Certificates and evidence
// ==========================================================================

TEST(classify, evidence_alone_is_indeterminate) {
  const ExponentialRatioKernel k;
  const auto v = classify_markov_bubble(k, defaults());
  EXPECT_EQ(v.verdict, Verdict::Indeterminate);
  EXPECT_EQ(v.criterion, "none");
  EXPECT_TRUE(v.evidence.count("fitted_power_rate_b_eps"));
}

TEST(classify, false_certificate_is_rejected) {
  const GaussianLogStepKernel k(0.8, 0.0, 0.1);
  ClassifyOptions o = defaults();
  TailBound claim;
  claim.coefficient = 1.0;
  claim.rate = 1.0;
  claim.x_from = 10.0;
  claim.epsilon = 1.0;
  o.certificates = {claim};
  try {
    classify_markov_bubble(k, o);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CertificateRejected);
  }
}

TEST(classify, user_certificate_enables_integrable_route) {
  const UniformDoublingKernel k;
  ClassifyOptions o = defaults();
  o.use_analytic_bounds = false;
  TailBound claim;
  claim.coefficient = 0.25;
  claim.rate = 1.0;
  claim.x_from = 10.0;
  claim.epsilon = 0.5;
  o.epsilon = 0.5;
  o.certificates = {claim};
  const auto v = classify_markov_bubble(k, o);
  EXPECT_EQ(v.verdict, Verdict::Bubble);
  EXPECT_NEAR(v.evidence.at("tail_integral_bound"), 0.025, 1e-15);
}

TEST(classify, bessel_kernel_without_certificate_is_indeterminate) {
  const InverseBesselKernel k(1.0, 1.0);
  EXPECT_EQ(classify_markov_bubble(k, defaults()).verdict, Verdict::Indeterminate);
}

TEST(classify, rejects_bad_options) {
  const UniformDoublingKernel k;
  ClassifyOptions o = defaults();
  o.epsilon = 0.0;
  EXPECT_THROW(classify_markov_bubble(k, o), Error);
  o = defaults();
  o.x_a = 100.0;
  EXPECT_THROW(classify_markov_bubble(k, o), Error);
}

// ==========================================================================
// Serialization
// ==========================================================================

TEST(verdict_json, round_trip_with_non_finite_evidence) {
  BubbleVerdict v;
  v.verdict = Verdict::Bubble;
  v.criterion = "integrable-recovery";
  v.evidence = {{"x", 0.1}, {"inf", std::numeric_limits<double>::infinity()}};
  v.notes = {"note"};
  const auto back = verdict_from_json(to_json(v));
  EXPECT_EQ(back.verdict, v.verdict);
  EXPECT_EQ(back.criterion, v.criterion);
  EXPECT_EQ(back.evidence.at("x"), 0.1);
  EXPECT_TRUE(std::isinf(back.evidence.at("inf")));
  EXPECT_EQ(back.notes, v.notes);
  EXPECT_THROW(verdict_from_string("maybe"), Error);
}

}  // namespace
}  // namespace bubbles
