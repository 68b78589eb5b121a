#include <gtest/gtest.h>

#include <cmath>

#include "conegreen/exact_dp.hpp"
#include "conegreen/monte_carlo.hpp"

using namespace conegreen;

TEST(Moments, MergeMatchesSinglePass) {
  Moments all, a, b;
  for (int i = 0; i < 100; ++i) {
    const double v = std::sin(i * 0.7) * 3 + i * 0.01;
    all.add(v);
    (i < 37 ? a : b).add(v);
  }
  const auto m = Moments::merge(a, b);
  EXPECT_EQ(m.count, all.count);
  EXPECT_NEAR(m.mean, all.mean, 1e-13);
  EXPECT_NEAR(m.m2, all.m2, 1e-11);
}

TEST(McSurvival, HalfLineOneStep) {
  const auto w = make_simple_walk(1);
  const auto e = mc_survival(w, Cone::half_space(1), Point{1}, 1, 20000, 11);
  EXPECT_NEAR(e.mean, 0.5, 4 * e.stderr_);
  const auto z = mc_survival(w, Cone::half_space(1), Point{1}, 0, 100, 11);
  EXPECT_EQ(z.mean, 1.0);
  EXPECT_EQ(z.stderr_, 0.0);
}

TEST(McSurvival, AgreesWithDp) {
  const auto w = make_product_rademacher(2);
  const auto s = survival(w, Cone::half_space(2), Point{0, 1}, 100);
  const auto e = mc_survival(w, Cone::half_space(2), Point{0, 1}, 100, 40000, 3);
  EXPECT_NEAR(e.mean, s[100], 4 * e.stderr_);
}

TEST(McGreen, OutsideTargetIsZero) {
  const auto e = mc_green(make_simple_walk(2), Cone::orthant(2), Point{1, 1}, Point{0, 3}, 100, 10, 1);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(McGreen, HalfLineAndHalfPlaneAgreeWithDp) {
  const auto w1 = make_simple_walk(1);
  const auto g1 = green_truncated(w1, Cone::half_space(1), Point{1}, Point{1}, 10000);
  const auto e1 = mc_green(w1, Cone::half_space(1), Point{1}, Point{1}, 10000, 20000, 5);
  EXPECT_NEAR(e1.mean, g1.value, 4 * e1.stderr_);
  EXPECT_NEAR(e1.mean, 2.0, 4 * e1.stderr_ + 0.02);

  const auto w2 = make_product_rademacher(2);
  const auto g2 = green_truncated(w2, Cone::half_space(2), Point{0, 1}, Point{4, 3}, 400);
  const auto e2 = mc_green(w2, Cone::half_space(2), Point{0, 1}, Point{4, 3}, 400, 40000, 6);
  EXPECT_NEAR(e2.mean, g2.value, 4 * e2.stderr_);
}

TEST(McGreen, DeterministicAcrossThreadCounts) {
  const auto w = make_product_lazy(2);
  const auto a = mc_green(w, Cone::orthant(2), Point{2, 2}, Point{3, 4}, 200, 5000, 77, 1);
  const auto b = mc_green(w, Cone::orthant(2), Point{2, 2}, Point{3, 4}, 200, 5000, 77, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Tilt, PlugInArithmetic) {
  const auto w = make_product_walk(rademacher_pmf(), 1);
  const auto t = tilt_parameters(w, 20.0, 0.5, 100);
  EXPECT_NEAR(t.trunc_second, 1.0, 1e-15);
  EXPECT_NEAR(t.h, std::log(3.0) / 10, 1e-15);
  EXPECT_NEAR(t.phi, std::cosh(t.h), 1e-15);
  const auto far = tilt_parameters(w, 20.0, 0.5, 1000000000000);
  EXPECT_LT(far.h, 1e-8);
  EXPECT_NEAR(far.phi, far.kept_mass, 1e-8);
  EXPECT_THROW(tilt_parameters(w, 20.0, 0.01, 100), std::domain_error);
}

TEST(Tilt, BoundsDominateExactWeight) {
  const auto w = make_product_rademacher(2);
  for (double y1 : {10.0, 20.0, 40.0})
    for (double gamma : {0.25, 0.5})
      for (std::int64_t n = 1; n <= static_cast<std::int64_t>(gamma * y1 * y1); ++n) {
        const auto t = tilt_parameters(w, y1, gamma, n);
        const double exact = tilted_weight_bound(t, n);
        EXPECT_LE(exact, std::pow(std::exp(1.0) * n / (gamma * y1 * y1), 1 / gamma) * (1 + 1e-12));
        EXPECT_LE(exact, fuk_nagaev_bound(w, y1, gamma, n, t.h) * (1 + 1e-12));
      }
  EXPECT_DOUBLE_EQ(fuk_nagaev_bound(w, 10, 0.5, 50, 0.0), 1.0);
}

TEST(Tilt, ForcedZeroTiltIsPlainMc) {
  const auto w = make_product_rademacher(2);
  TiltOptions o;
  o.forced_h = 0.0;
  const auto t = mc_green_tilted(w, Cone::half_space(2), Point{0, 1}, Point{3, 2}, 300, 0.5, 4000, 9, o);
  const auto p = mc_green(w, Cone::half_space(2), Point{0, 1}, Point{3, 2}, 300, 4000, 9);
  EXPECT_NEAR(t.estimate.mean, p.mean, 1e-12);
  EXPECT_EQ(t.remainder_bound, 0.0);
}

TEST(Tilt, UnbiasedAgainstDp) {
  const auto w = make_product_rademacher(2);
  const auto cone = Cone::half_space(2);
  const Point x{0, 1}, y{12, 3};
  const auto g = green_truncated(w, cone, x, y, 300);
  const auto t = mc_green_tilted(w, cone, x, y, 300, 0.5, 40000, 21);
  EXPECT_GT(t.tilt.h, 0.0);
  EXPECT_NEAR(t.estimate.mean, g.value, 4 * t.estimate.stderr_);
}

TEST(EstimateV, HalfPlaneRecoversHeight) {
  const auto v = estimate_V(make_product_rademacher(2), Cone::half_space(2), Point{0, 3}, {0, 50, 200}, 20000, 4);
  EXPECT_DOUBLE_EQ(v.values[0], 3.0);
  EXPECT_EQ(v.stderrs[0], 0.0);
  EXPECT_NEAR(v.value, 3.0, 4 * v.stderr_);
}

TEST(EstimateV, QuarterPlanePlateauAndHarmonicity) {
  const auto w = make_product_rademacher(2);
  const auto cone = Cone::wedge(M_PI / 2);
  const auto v = estimate_V(w, cone, Point{3, 3}, {64, 256, 1024}, 200000, 8);
  EXPECT_TRUE(v.plateau);
  // Independent coordinates, each a martingale killed at 0: V = u = 2 x y exactly.
  EXPECT_NEAR(v.value, 18.0, 4 * v.stderr_);
  // E[V(x + X); tau > 1] from independent estimates at the neighbours.
  double mean = 0, var = 0;
  for (const auto& a : w.atoms()) {
    const Point z = Point{3, 3} + a.step;
    if (!cone.contains(z)) continue;
    const auto vz = estimate_V(w, cone, z, {1024}, 20000, 100 + z[0] * 10 + z[1]);
    mean += a.prob * vz.value;
    var += a.prob * a.prob * vz.stderr_ * vz.stderr_;
  }
  EXPECT_NEAR(mean, v.value, 4 * std::sqrt(var + v.stderr_ * v.stderr_));
}
