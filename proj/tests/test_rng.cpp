#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "transop/rng.hpp"

using transop::Stream;

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswerZero) {
  const auto out = Stream::philox({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Stream::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Stream::philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Stream, SameSeedSameSequence) {
  Stream a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Stream, StreamsAndSeedsDiffer) {
  Stream a(42, 3), b(42, 4), c(43, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(Stream, UniformOpenInterval) {
  Stream s(1, 0);
  double lo = 1, hi = 0, sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  // Mean of U(0,1) within 5 standard errors.
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
}

TEST(Stream, UniformBuckets) {
  Stream s(7, 11);
  std::vector<int> counts(16, 0);
  const int n = 160000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(s.uniform() * 16)];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - n / 16.0) * (c - n / 16.0) / (n / 16.0);
  // 15 degrees of freedom; 0.999 quantile is about 37.7.
  EXPECT_LT(chi2, 37.7);
}

TEST(Stream, SeedInfoAndBlocks) {
  Stream s(5, 9);
  EXPECT_EQ(s.seed_info().master_seed, 5u);
  EXPECT_EQ(s.seed_info().stream_id, 9u);
  EXPECT_EQ(s.blocks_used(), 0u);
  s.next_u64();
  s.next_u64();
  EXPECT_EQ(s.blocks_used(), 1u);
  s.next_u64();
  EXPECT_EQ(s.blocks_used(), 2u);
}

TEST(Stream, OutputMatchesBlockFunction) {
  Stream s(0x0000000100000002ull, 0x0000000300000004ull);
  const auto out = Stream::philox({0, 0, 4, 3}, {2, 1});
  EXPECT_EQ(s.next_u64(), (static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
  EXPECT_EQ(s.next_u64(), (static_cast<std::uint64_t>(out[3]) << 32) | out[2]);
}
