#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "conegreen/exact_dp.hpp"

using namespace conegreen;

namespace {

// Enumerates every path of length n and accumulates those that stay in the cone.
std::map<Point, double> enumerate_killed(const StepDistribution& w, const Cone& k, const Point& x, int n) {
  std::map<Point, double> out;
  std::function<void(const Point&, double, int)> rec = [&](const Point& y, double pr, int left) {
    if (left == 0) {
      out[y] += pr;
      return;
    }
    for (const auto& a : w.atoms()) {
      const Point z = y + a.step;
      if (k.contains(z)) rec(z, pr * a.prob, left - 1);
    }
  };
  rec(x, 1.0, n);
  return out;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// P(simple +-1 walk goes from a to b in n steps).
double free_1d(int a, int b, int n) {
  const int dlt = b - a;
  if ((n + dlt) % 2 != 0 || std::abs(dlt) > n) return 0.0;
  return binom(n, (n + dlt) / 2) * std::pow(0.5, n);
}

// Reflection principle: same, staying strictly positive.
double killed_1d(int a, int b, int n) { return free_1d(a, b, n) - free_1d(-a, b, n); }

}  // namespace

TEST(ExactDp, MatchesPathEnumerationInWedge) {
  const StepDistribution w(2, {{Point{1, 0}, 0.3}, {Point{-1, 1}, 0.2}, {Point{0, -1}, 0.25}, {Point{-1, -1}, 0.25}},
                           StepDistribution::Kind::custom, "skew");
  const auto cone = Cone::wedge(3 * std::numbers::pi / 4);
  const Point x{2, 1};
  DpOptions opts;
  opts.keep_history = true;
  const auto kk = killed_kernel(w, cone, x, 7, opts);
  for (int n = 0; n <= 7; ++n) {
    const auto ref = enumerate_killed(w, cone, x, n);
    double mass = 0;
    for (const auto& [y, p] : ref) {
      EXPECT_NEAR(kk.at(n, y), p, 1e-15) << n << " " << y.to_string();
      mass += p;
    }
    EXPECT_NEAR(kk.survival()[n], mass, 1e-14);
    double dp_mass = 0;
    kk.for_each_cell(n, [&](const Point&, double v) { dp_mass += v; });
    EXPECT_NEAR(dp_mass, mass, 1e-14);
  }
}

TEST(ExactDp, ReflectionPrincipleOnHalfLine) {
  const auto w = make_simple_walk(1);
  DpOptions opts;
  opts.keep_history = true;
  const auto kk = killed_kernel(w, Cone::half_space(1), Point{3}, 60, opts);
  for (int n : {0, 1, 7, 30, 60})
    for (int y = 1; y < 40; ++y) EXPECT_NEAR(kk.at(n, Point{y}), killed_1d(3, y, n), 1e-14);
}

TEST(ExactDp, QuarterPlaneFactorises) {
  const auto w = make_product_rademacher(2);
  const auto kk = killed_kernel(w, Cone::orthant(2), Point{1, 2}, 40);
  for (int a = 1; a < 30; ++a)
    for (int b = 1; b < 30; ++b)
      EXPECT_NEAR(kk.at(40, Point{a, b}), killed_1d(1, a, 40) * killed_1d(2, b, 40), 1e-15);
}

TEST(ExactDp, KilledMassBalancesSurvival) {
  const auto w = make_product_lazy(2);
  const auto kk = killed_kernel(w, Cone::wedge(2.0), Point{3, 2}, 80);
  const auto& s = kk.survival();
  const auto& k = kk.killed();
  EXPECT_EQ(k[0], 0.0);
  for (std::size_t n = 1; n < s.size(); ++n) EXPECT_NEAR(s[n - 1] - s[n], k[n], 1e-13);
}

TEST(ExactDp, GreenOnHalfLineIsTwiceMinimum) {
  // Simple walk killed at 0: G(x, y) = 2 min(x, y).
  const auto w = make_simple_walk(1);
  for (auto [x, y] : {std::pair{1, 1}, {2, 5}, {4, 3}}) {
    const auto g = green_truncated(w, Cone::half_space(1), Point{x}, Point{y}, 5000);
    EXPECT_NEAR(g.total(), 2.0 * std::min(x, y), 2e-3 * std::min(x, y));
    EXPECT_LT(g.value, 2.0 * std::min(x, y));
  }
}

TEST(ExactDp, ThreadCountDoesNotChangeBits) {
  const auto w = make_product_lazy(2);
  DpOptions one, four;
  four.threads = 4;
  one.probes = four.probes = {Point{5, 5}, Point{1, 9}};
  const auto a = killed_kernel(w, Cone::orthant(2), Point{2, 3}, 120, one);
  const auto b = killed_kernel(w, Cone::orthant(2), Point{2, 3}, 120, four);
  EXPECT_EQ(a.survival(), b.survival());
  EXPECT_EQ(a.probe_series(0), b.probe_series(0));
  EXPECT_EQ(a.probe_series(1), b.probe_series(1));
}

TEST(ExactDp, MemoryCapIsEnforced) {
  DpOptions opts;
  opts.memory_cap = 1 << 20;
  EXPECT_THROW(killed_kernel(make_simple_walk(3), Cone::orthant(3), Point{1, 1, 1}, 200, opts), MemoryCapExceeded);
  EXPECT_GT(killed_kernel_bytes(make_simple_walk(3), Cone::orthant(3), Point{1, 1, 1}, 200, false), 1u << 20);
}

TEST(ExactDp, FreeGreenCountsStartingTime) {
  const auto w = make_product_rademacher(1);
  EXPECT_DOUBLE_EQ(green_free_truncated(w, Point{0}, Point{0}, 0).value, 1.0);
  // 1 + P(S_2 = 0) = 3/2
  EXPECT_DOUBLE_EQ(green_free_truncated(w, Point{0}, Point{0}, 2).value, 1.5);
}

TEST(ExactDp, ExpectedTauTruncated) {
  // From 1 on the half-line: P(tau = 1) = 1/2, P(tau = 3) = 1/8.
  const auto w = make_simple_walk(1);
  EXPECT_NEAR(expected_tau_truncated(w, Cone::half_space(1), Point{1}, 4), 0.5 + 3 * 0.125, 1e-15);
}

TEST(ExactDp, TailFitRecoversPowerLaw) {
  // series n^{-3} exp(-q/2n): tail from N is A q^{1-a} I(N/q), checked with a long explicit sum.
  const double q = 50.0;
  std::vector<double> s(401, 0.0);
  for (int n = 1; n <= 400; ++n) s[n] = 2.0 * std::pow(n, -3.0) * std::exp(-q / (2.0 * n));
  double ref = 0;
  for (int n = 401; n < 4000000; ++n) ref += 2.0 * std::pow(n, -3.0) * std::exp(-q / (2.0 * n));
  EXPECT_NEAR(fitted_green_tail(s, 1, 2.0, 2, q), ref, 2e-3 * ref);
}

TEST(ExactDp, DualityWithReversedWalk) {
  const StepDistribution w(2, {{Point{1, 1}, 0.2}, {Point{-2, 0}, 0.3}, {Point{1, -1}, 0.25}, {Point{0, 1}, 0.25}});
  const auto r = w.reversed();
  const auto cone = Cone::half_space(2);
  const Point x{0, 2};
  const int n = 30;
  const auto fwd = killed_kernel(w, cone, x, n);
  fwd.for_each_cell(n, [&](const Point& y, double v) {
    if (std::abs(y[0]) % 7 != 0) return;  // spot check a sublattice of targets
    const auto back = killed_kernel(r, cone, y, n);
    EXPECT_NEAR(back.at(n, x), v, 1e-12);
  });
}

TEST(ExactDp, DominationAndMonotonicity) {
  const auto w = make_product_lazy(2);
  const auto killed = killed_kernel(w, Cone::wedge(2.2), Point{2, 3}, 60);
  const auto free = killed_kernel(w, Cone::full_space(2), Point{2, 3}, 60);
  killed.for_each_cell(60, [&](const Point& y, double v) { EXPECT_LE(v, free.at(60, y) + 1e-18); });
  double last = 0;
  for (std::int64_t n : {10, 20, 40, 80}) {
    const double g = green_truncated(w, Cone::wedge(2.2), Point{2, 3}, Point{4, 4}, n).value;
    EXPECT_GE(g, last);
    last = g;
  }
}

TEST(ExactDp, DeepStartNeverDies) {
  const auto s = survival(make_simple_walk(2), Cone::half_space(2), Point{0, 50}, 40);
  for (double v : s) EXPECT_NEAR(v, 1.0, 1e-14);
  EXPECT_NEAR(expected_tau_truncated(make_simple_walk(2), Cone::half_space(2), Point{0, 50}, 40), 0.0, 1e-12);
}

TEST(ExactDp, ExpectedTauGrowsLikeSquareRoot) {
  const auto w = make_simple_walk(1);
  const double a = expected_tau_truncated(w, Cone::half_space(1), Point{1}, 1000);
  const double b = expected_tau_truncated(w, Cone::half_space(1), Point{1}, 10000);
  EXPECT_NEAR(std::log(b / a) / std::log(10.0), 0.5, 0.05);
}

TEST(ExactDp, LltTailClosedForm) {
  // p = 1, d = 2, N = |y|^2: int_1^inf z^{-2} e^{-1/(2z)} dz = 2 (1 - e^{-1/2}).
  const double m = 10.0;
  const double t = llt_tail(1.0, 2, 1.0, 1.0, m, 100);
  EXPECT_NEAR(t, std::pow(m, -2.0) * 2.0 * (1.0 - std::exp(-0.5)), 1e-12);
  EXPECT_LT(llt_tail(1.0, 2, 1.0, 1.0, m, 200), t);
  EXPECT_LT(llt_tail(1.0, 2, 1.0, 1.0, m, 100000000), 1e-8);
}
