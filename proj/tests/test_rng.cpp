#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "probedesign/rng.hpp"

namespace pd = probedesign;

TEST(Philox, KnownAnswerZeroKeyZeroCounter) {
  // Reference output of Philox4x32-10 for key 0 and counter 0.
  pd::Philox g(0, 0);
  EXPECT_EQ(g.next_u32(), 0x6627e8d5u);
  EXPECT_EQ(g.next_u32(), 0xe169c58du);
  EXPECT_EQ(g.next_u32(), 0xbc57ac4cu);
  EXPECT_EQ(g.next_u32(), 0x9b00dbd8u);
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  pd::Philox a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(Philox, UniformOpenInterval) {
  pd::Philox g(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Philox, GaussianMoments) {
  pd::Philox g(2, 3);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = g.gaussian();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m1, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(m4, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Philox, GaussianVectorMatchesScalarDraws) {
  pd::Philox a(9, 1), b(9, 1);
  const Eigen::VectorXd v = a.gaussian_vector(7);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(v(i), b.gaussian());
}

TEST(Seeds, DerivedSeedsDependOnLabelAndParent) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s : {0ull, 1ull, 2ull}) {
    for (const char* label : {"randomize", "run_scenario", "simulate/record", ""}) {
      EXPECT_TRUE(seen.insert(pd::derive_seed(s, label)).second);
      EXPECT_EQ(pd::derive_seed(s, label), pd::derive_seed(s, label));
    }
  }
  // Reference value of the splitmix64 finalizer.
  EXPECT_EQ(pd::splitmix64(0), 0xe220a8397b1dcdafull);
}
