#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "conegreen/lattice.hpp"
#include "conegreen/rng.hpp"

using namespace conegreen;

TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, ReplayableAndIndependentOfOrder) {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) a.next_u32();
  for (int i = 0; i < 100; ++i) b.next_u32();
  EXPECT_EQ(a, b);
  EXPECT_NE(RandomStream(42, 7).next_u64(), c.next_u64());
}

TEST(RandomStream, UniformMoments) {
  RandomStream r(1, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(s2 / n, 1.0 / 3, 0.005);
}

TEST(MixSeed, DistinctChildren) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(mix_seed(5, s));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(IntLattice, CheckerboardIndexTwo) {
  IntLattice l(2, {Point{1, 1}, Point{1, -1}});
  EXPECT_TRUE(l.full_rank());
  EXPECT_EQ(l.index(), 2);
  EXPECT_TRUE(l.contains(Point{2, 0}));
  EXPECT_TRUE(l.contains(Point{3, -1}));
  EXPECT_FALSE(l.contains(Point{1, 0}));
}

TEST(IntLattice, BruteForceMembership) {
  const std::vector<Point> gens{Point{2, 0, 0}, Point{1, 3, 0}, Point{0, 1, 2}};
  IntLattice l(3, gens);
  // Enumerate small integer combinations directly.
  std::set<Point> span;
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b)
      for (int c = -6; c <= 6; ++c) span.insert(a * gens[0] + b * gens[1] + c * gens[2]);
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) {
        const Point p{x, y, z};
        EXPECT_EQ(l.contains(p), span.count(p) > 0) << p.to_string();
      }
  // det of the generator matrix
  EXPECT_EQ(l.index(), 12);
}

TEST(IntLattice, RankDeficient) {
  IntLattice l(2, {Point{1, 1}, Point{2, 2}});
  EXPECT_EQ(l.rank(), 1);
  EXPECT_EQ(l.index(), 0);
  EXPECT_FALSE(l.contains(Point{1, 0}));
}
