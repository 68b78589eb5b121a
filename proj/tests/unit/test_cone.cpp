#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "conegreen/cone.hpp"
#include "conegreen/profile_integral.hpp"

using namespace conegreen;

namespace {

// Lower incomplete gamma by its power series.
double lower_gamma(double s, double x) {
  double term = 1.0 / s, sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= x / (s + k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return std::pow(x, s) * std::exp(-x) * sum;
}

}  // namespace

TEST(Cone, ExponentsAndEigenvalues) {
  EXPECT_DOUBLE_EQ(Cone::half_space(3).p(), 1.0);
  EXPECT_NEAR(Cone::orthant(2).p(), 2.0, 1e-14);
  EXPECT_NEAR(Cone::orthant(3).p(), 3.0, 1e-14);
  EXPECT_NEAR(Cone::orthant(3).lambda1(), 12.0, 1e-14);
  EXPECT_NEAR(Cone::wedge(3 * std::numbers::pi / 4).p(), 4.0 / 3, 1e-14);
  EXPECT_NEAR(exponent_from_lambda(12.0, 3), 3.0, 1e-14);
  EXPECT_THROW(Cone::wedge(0.0), std::invalid_argument);
  EXPECT_THROW(Cone::wedge(2 * std::numbers::pi), std::invalid_argument);
}

TEST(Cone, Membership) {
  const auto q = Cone::orthant(2);
  EXPECT_TRUE(q.contains(Point{1, 1}));
  EXPECT_FALSE(q.contains(Point{0, 1}));
  const auto h = Cone::half_space(2);
  EXPECT_TRUE(h.contains(Point{-5, 1}));
  EXPECT_FALSE(h.contains(Point{3, 0}));
  const auto w = Cone::wedge(3 * std::numbers::pi / 4);
  EXPECT_TRUE(w.contains(Point{-2, 3}));
  EXPECT_FALSE(w.contains(Point{-3, 3}));  // on the second wall
  EXPECT_FALSE(w.contains(Point{-3, 2}));
  EXPECT_FALSE(w.contains(Point{4, 0}));
  EXPECT_TRUE(Cone::full_space(2).contains(Point{0, 0}));
}

TEST(Cone, HarmonicFunctionsVanishOnWallsAndAreDiscreteHarmonicAsymptotically) {
  const auto w = Cone::wedge(3 * std::numbers::pi / 4);
  EXPECT_NEAR(w.harmonic_u(Point{5, 0}), 0.0, 1e-12);
  EXPECT_NEAR(w.harmonic_u(Point{-5, 5}), 0.0, 1e-9);
  const auto q = Cone::orthant(2);
  EXPECT_DOUBLE_EQ(q.harmonic_u(Point{3, 4}), 2.0 * 12.0);
  EXPECT_DOUBLE_EQ(Cone::half_space(2).harmonic_u(Point{7, 3}), 3.0);
  // Sup of u on the unit circle is one.
  double best = 0;
  for (int i = 1; i < 4000; ++i) {
    const double t = 3 * std::numbers::pi / 4 * i / 4000;
    const double r = 1e6;
    best = std::max(best, w.harmonic_u(Point{std::llround(r * std::cos(t)), std::llround(r * std::sin(t))}) /
                              std::pow(r, w.p()));
  }
  EXPECT_NEAR(best, 1.0, 1e-4);
}

TEST(Cone, BoundaryDistance) {
  EXPECT_DOUBLE_EQ(Cone::orthant(3).dist_boundary(Point{4, 2, 9}), 2.0);
  EXPECT_DOUBLE_EQ(Cone::half_space(2).dist_boundary(Point{-4, 6}), 6.0);
  EXPECT_NEAR(Cone::wedge(std::numbers::pi / 2).dist_boundary(Point{3, 5}), 3.0, 1e-12);
}

TEST(ProfileIntegral, MatchesIncompleteGamma) {
  // int_eps^inf z^{-a} e^{-1/(2z)} dz = 2^{a-1} gamma(a-1, 1/(2 eps)).
  for (double p : {1.0, 4.0 / 3, 2.0, 3.0}) {
    for (int d : {2, 3}) {
      const double a = p + d / 2.0;
      const double full = std::pow(2.0, a - 1) * std::tgamma(a - 1);
      EXPECT_NEAR(profile_integral(p, d, 0.0), full, 1e-10 * full);
      for (double eps : {0.05, 0.5, 2.0, 40.0}) {
        const double ref = std::pow(2.0, a - 1) * lower_gamma(a - 1, 1 / (2 * eps));
        EXPECT_NEAR(profile_integral(p, d, eps), ref, 1e-9 * std::max(ref, 1e-6)) << p << " " << d << " " << eps;
      }
    }
  }
  EXPECT_THROW(profile_integral(0.0, 2, 0.0), std::domain_error);
  EXPECT_EQ(profile_integral(2.0, 2, INFINITY), 0.0);
}
