#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bubbles/random.hpp"

namespace bubbles {
namespace {

// ==========================================================================
// Philox4x32-10 known-answer vectors
// ==========================================================================

TEST(philox, known_answer_zero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(philox, known_answer_ones) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(philox, known_answer_pi) {
  const auto out =
      Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

// ==========================================================================
// Streams
// ==========================================================================

TEST(random_stream, same_key_and_stream_reproduce) {
  RandomStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(random_stream, distinct_streams_differ) {
  std::set<double> first;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    RandomStream r(42, s);
    first.insert(r.uniform());
  }
  EXPECT_EQ(first.size(), 1000u);
}

TEST(random_stream, uniform_in_open_interval_with_unit_moments) {
  RandomStream r(1, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 5e-3);
}

TEST(random_stream, normal_and_exponential_moments) {
  RandomStream r(3, 9);
  const int n = 200000;
  double zs = 0.0, zq = 0.0, es = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    zs += z;
    zq += z * z;
    es += r.exponential();
  }
  EXPECT_NEAR(zs / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(zq / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(es / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(random_stream, counts_consumed_blocks) {
  Philox4x32 e(5, 0);
  for (int i = 0; i < 9; ++i) e();
  EXPECT_EQ(e.blocks_consumed(), 3u);
}

}  // namespace
}  // namespace bubbles
