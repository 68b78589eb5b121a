#include <gtest/gtest.h>

#include <cmath>

#include "conegreen/cone.hpp"
#include "conegreen/exact_dp.hpp"
#include "conegreen/one_dim.hpp"

using namespace conegreen;

namespace {

const Pmf1D kSkew{{{-1, 2.0 / 3}, {2, 1.0 / 3}}};

// Renewal function of heights {1: 1/2, 2: 1/2}: u(m) = 2/3 + (1/3)(-1/2)^m.
double skew_renewal(std::int64_t k) {
  double s = 0;
  for (std::int64_t m = 0; m <= k; ++m) s += 2.0 / 3 + std::pow(-0.5, m) / 3;
  return s;
}

}  // namespace

TEST(Ladder, SkipFreeWalksHaveUnitHeight) {
  for (const auto& pmf : {rademacher_pmf(), Pmf1D{{{-1, 0.25}, {0, 0.5}, {1, 0.25}}}}) {
    const auto law = ladder_height_pmf(pmf, 10000, 64);
    ASSERT_EQ(law.height_pmf.size(), 2u);
    EXPECT_NEAR(law.height_pmf[1], 1.0, 1e-12);
    EXPECT_LE(law.residual, 1e-6);
    EXPECT_TRUE(law.warnings.empty());
    for (std::int64_t k = 0; k <= 64; ++k) EXPECT_NEAR(renewal_function(law, k), k + 1.0, 1e-9);
  }
}

TEST(Ladder, SkewLawMatchesWienerHopfRoots) {
  // 1 - E z^X = (2/3)(1 - 1/z)(1 - z/2 - z^2/2), so P(H = 1) = P(H = 2) = 1/2.
  const auto law = ladder_height_pmf(kSkew, 10000, 200);
  EXPECT_NEAR(law.height_pmf[1], 0.5, 1e-6);
  EXPECT_NEAR(law.height_pmf[2], 0.5, 1e-6);
  EXPECT_GT(law.unfinished_mass, 0.0);
  for (std::int64_t k : {0, 1, 2, 10, 200}) EXPECT_NEAR(renewal_function(law, k), skew_renewal(k), 1e-5 * (k + 1));
  EXPECT_THROW(renewal_function(law, 201), std::out_of_range);
  EXPECT_THROW(ladder_height_pmf(kSkew, 0), std::invalid_argument);
  EXPECT_THROW(ladder_height_pmf(Pmf1D{{{-1, 0.5}, {2, 0.5}}}, 10), std::invalid_argument);
}

TEST(HalfLine, RademacherIsIdentity) {
  const HalfLineHarmonic v(rademacher_pmf(), 10000, 100);
  for (std::int64_t k = 1; k <= 101; ++k) EXPECT_NEAR(v(k), double(k), 1e-9);
  EXPECT_NEAR(reversed_harmonic(rademacher_pmf(), 7), 7.0, 1e-9);
}

TEST(HalfLine, SkewLawAndReverse) {
  const HalfLineHarmonic v(kSkew, 10000, 256);
  const HalfLineHarmonic vr(kSkew.flipped(), 10000, 256);
  EXPECT_DOUBLE_EQ(v(1), 1.0);
  EXPECT_DOUBLE_EQ(vr(1), 1.0);
  // Down-skip-free walk: V(x) = x.
  for (std::int64_t k = 1; k <= 50; ++k) EXPECT_NEAR(v(k), double(k), 1e-9);
  for (std::int64_t k = 1; k <= 50; ++k) EXPECT_NEAR(vr(k), skew_renewal(k - 1), 1e-5 * k);
  EXPECT_GT(std::abs(vr(2) - v(2)), 0.4);
  for (std::int64_t k = 3; k <= 50; ++k) {
    EXPECT_LT(v.harmonicity_defect(k), 1e-6 * v(k));
    EXPECT_LT(vr.harmonicity_defect(k), 1e-6 * vr(k));
  }
  for (std::int64_t k = 1; k < vr.max_level(); ++k) EXPECT_LE(vr(k), vr(k + 1));
}

TEST(HalfLine, SurvivalPlateausScaleWithV) {
  // P(tau_x > n) sqrt(n) / V(x) should not depend on x.
  const StepDistribution w(1, {{Point{-1}, 2.0 / 3}, {Point{2}, 1.0 / 3}});
  const HalfLineHarmonic v(kSkew, 10000, 64);
  const std::int64_t n = 10000;
  const auto s1 = survival(w, Cone::half_space(1), Point{1}, n);
  const auto s5 = survival(w, Cone::half_space(1), Point{5}, n);
  const double r = (s1[n] / v(1)) / (s5[n] / v(5));
  EXPECT_NEAR(r, 1.0, 0.03);
}

TEST(HalfLine, SimpleWalkSurvival) {
  const auto w = make_simple_walk(1);
  const auto s = survival(w, Cone::half_space(1), Point{1}, 10000);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  EXPECT_DOUBLE_EQ(s[3], 0.375);
  EXPECT_NEAR(s[10000] / std::sqrt(2.0 / (M_PI * 1e4)), 1.0, 0.02);
}
