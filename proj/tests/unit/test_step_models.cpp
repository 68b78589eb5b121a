#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "conegreen/cone.hpp"
#include "conegreen/step_models.hpp"

using namespace conegreen;

TEST(StepModels, SimpleWalkMoments) {
  for (int d = 1; d <= 4; ++d) {
    const auto w = make_simple_walk(d);
    EXPECT_EQ(w.atoms().size(), static_cast<std::size_t>(2 * d));
    for (int i = 0; i < d; ++i) {
      EXPECT_NEAR(w.mean()[i], 0.0, 1e-15);
      for (int j = 0; j < d; ++j) EXPECT_NEAR(w.covariance(i, j), i == j ? 1.0 / d : 0.0, 1e-15);
    }
    EXPECT_EQ(w.period().period, 2);
  }
}

TEST(StepModels, ProductLawsHaveIdentityCovariance) {
  for (const auto& w : {make_product_rademacher(3), make_product_lazy(2)}) {
    for (int i = 0; i < w.dim(); ++i)
      for (int j = 0; j < w.dim(); ++j) EXPECT_NEAR(w.covariance(i, j), i == j ? 1.0 : 0.0, 1e-14);
  }
  EXPECT_EQ(make_product_rademacher(2).atoms().size(), 4u);
  EXPECT_EQ(make_product_lazy(2).atoms().size(), 25u);
  EXPECT_EQ(make_product_lazy(2).period().period, 1);
}

TEST(StepModels, RejectsBadLaws) {
  EXPECT_THROW(StepDistribution(2, {{Point{1, 0}, 0.5}, {Point{-1, 0}, 0.5}}), std::invalid_argument);
  EXPECT_THROW(StepDistribution(1, {{Point{1}, 0.5}, {Point{-1}, 0.6}}), std::invalid_argument);
  EXPECT_THROW(StepDistribution(1, {{Point{1}, 1.2}, {Point{-1}, -0.2}}), std::invalid_argument);
  EXPECT_THROW(make_product_walk(Pmf1D{{{-1, 0.25}, {1, 0.75}}}, 2), std::invalid_argument);
  EXPECT_THROW(make_williamson(2, 3.0, 1), std::invalid_argument);
}

TEST(StepModels, WilliamsonWeightsAndMoments) {
  const double beta = 3.0;
  const auto w = make_williamson(2, beta, 30);
  double total = 0;
  for (const auto& a : w.atoms()) total += a.prob;
  EXPECT_NEAR(total, 1.0, 1e-12);
  const auto q = williamson_weights(beta, 30);
  double z = 0;
  for (int n = 1; n <= 30; ++n) z += std::log(n + 1.0) * std::pow(2.0, -n * beta);
  // Direct second moment: sum_n q_n 4^n / z.
  double m2 = 0;
  for (int n = 1; n <= 30; ++n) m2 += std::log(n + 1.0) * std::pow(2.0, -n * beta) * std::pow(4.0, n);
  EXPECT_NEAR(moment(w, 2.0), m2 / z, 1e-12 * m2 / z);
  ASSERT_TRUE(w.tail_exponent().has_value());
  EXPECT_DOUBLE_EQ(*w.tail_exponent(), beta);
}

TEST(StepModels, Pmf1DPeriod) {
  EXPECT_EQ(rademacher_pmf().period(), 2);
  EXPECT_EQ((Pmf1D{{{-2, 1.0 / 3}, {1, 2.0 / 3}}}).period(), 3);
  EXPECT_EQ(lazy_pmf().period(), 1);
  EXPECT_EQ((Pmf1D{{{-1, 0.5}, {3, 0.5}}}).period(), 4);
}

TEST(StepModels, ReachabilityParity) {
  const auto w = make_product_rademacher(2);
  EXPECT_TRUE(w.reachable(Point{1, 1}, Point{3, 5}));
  EXPECT_FALSE(w.reachable(Point{1, 1}, Point{2, 1}));
  EXPECT_TRUE(w.reachable_at(Point{0, 0}, Point{2, 0}, 2));
  EXPECT_FALSE(w.reachable_at(Point{0, 0}, Point{2, 0}, 3));
}

TEST(StepModels, SamplerFrequencies) {
  const auto w = make_product_lazy(1);
  RandomStream rng(3, 0);
  std::map<std::int64_t, int> counts;
  const int n = 160000;
  for (int i = 0; i < n; ++i) counts[w.sample(rng)[0]]++;
  const std::map<std::int64_t, double> expect{{-2, 1 / 16.}, {-1, 4 / 16.}, {0, 6 / 16.}, {1, 4 / 16.}, {2, 1 / 16.}};
  for (auto [v, p] : expect) EXPECT_NEAR(counts[v] / double(n), p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(StepModels, PureSamplerMatchesMethod) {
  const auto w = make_simple_walk(3);
  RandomStream a(9, 1);
  RandomStream b = a;
  auto [step, next] = sample_step(w, a);
  EXPECT_EQ(step, w.sample(b));
  EXPECT_EQ(next, b);
}

TEST(StepModels, ReversedAndMarginal) {
  const StepDistribution w(2, {{Point{2, 1}, 0.25}, {Point{-1, 0}, 0.5}, {Point{0, -1}, 0.25}});
  const auto r = w.reversed();
  for (const auto& a : r.atoms()) {
    bool found = false;
    for (const auto& b : w.atoms()) found |= (b.step == -a.step && b.prob == a.prob);
    EXPECT_TRUE(found);
  }
  const auto m = w.marginal(0);
  EXPECT_NEAR(m.mean(), 0.0, 1e-15);
  EXPECT_NEAR(m.second_moment(), 1.5, 1e-15);
}

TEST(Assumptions, R1ThresholdAndWilliamson) {
  EXPECT_DOUBLE_EQ(r1_threshold(2.0, 2), 2.0);
  EXPECT_DOUBLE_EQ(r1_threshold(1.0, 2), 2.0);
  EXPECT_DOUBLE_EQ(r1_threshold(4.0, 3), 5.0);
  const auto cone = Cone::orthant(2);
  const auto good = validate_assumptions(make_williamson(2, 3.0, 30), cone);
  EXPECT_TRUE(good.r1_ok);
  const auto bad = validate_assumptions(make_williamson(2, 1.5, 30), cone);
  EXPECT_FALSE(bad.r1_ok);
  EXPECT_TRUE(validate_assumptions(make_product_rademacher(2), cone).all_ok());
}
