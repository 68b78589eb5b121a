#include "conegreen/one_dim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conegreen {

namespace {

struct CrossingRun {
  std::vector<double> height;          // accumulated P(H = k, crossing time <= horizon)
  std::vector<double> height_at_half;  // same, up to horizon / 2
  std::vector<double> last_profile;    // crossings over the final period, by height
  double unfinished = 0.0;
  double unfinished_at_half = 0.0;
  std::vector<double> half_profile;
};

// Walk started at 0 and stopped on its first entry into (0, inf).
CrossingRun run_crossings(const Pmf1D& pmf, std::int64_t horizon) {
  const std::int64_t up = pmf.max_up();
  const std::int64_t down = pmf.max_down();
  const std::int64_t period = std::max<std::int64_t>(1, pmf.period());
  const std::int64_t depth = horizon * down;  // cells 0..depth hold levels 0, -1, ..., -depth
  CrossingRun run;
  run.height.assign(static_cast<std::size_t>(up + 1), 0.0);
  run.last_profile.assign(static_cast<std::size_t>(up + 1), 0.0);
  run.half_profile.assign(static_cast<std::size_t>(up + 1), 0.0);

  std::vector<double> cur(static_cast<std::size_t>(depth + 1), 0.0), next(cur.size(), 0.0);
  cur[0] = 1.0;
  const std::int64_t half = horizon / 2;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    const std::int64_t reach = std::min(depth, (n - 1) * down);
    const bool tail_window = n > horizon - period;
    const bool half_window = n > half - period && n <= half;
    for (std::int64_t i = 0; i <= reach; ++i) {
      const double m = cur[static_cast<std::size_t>(i)];
      if (m == 0.0) continue;
      for (auto [v, p] : pmf.atoms) {
        const std::int64_t level = -i + v;
        if (level > 0) {
          run.height[static_cast<std::size_t>(level)] += m * p;
          if (tail_window) run.last_profile[static_cast<std::size_t>(level)] += m * p;
          if (half_window) run.half_profile[static_cast<std::size_t>(level)] += m * p;
        } else {
          next[static_cast<std::size_t>(-level)] += m * p;
        }
      }
    }
    std::swap(cur, next);
    if (n == half) {
      run.height_at_half = run.height;
      for (std::int64_t i = 0; i <= std::min(depth, n * down); ++i) run.unfinished_at_half += cur[static_cast<std::size_t>(i)];
    }
  }
  for (double m : cur) run.unfinished += m;
  if (run.height_at_half.empty()) {
    run.height_at_half = run.height;
    run.unfinished_at_half = run.unfinished;
    run.half_profile = run.last_profile;
  }
  return run;
}

std::vector<double> extrapolate(std::vector<double> height, const std::vector<double>& profile, double unfinished) {
  double z = 0.0;
  for (double v : profile) z += v;
  if (z > 0.0)
    for (std::size_t k = 0; k < height.size(); ++k) height[k] += unfinished * profile[k] / z;
  // Mean-zero ladder heights are proper; drop the rounding left by the layer sums.
  double total = 0.0;
  for (double v : height) total += v;
  if (total > 0.0)
    for (double& v : height) v /= total;
  return height;
}

}  // namespace

double LadderLaw::mean_height() const {
  double m = 0.0;
  for (std::size_t k = 0; k < height_pmf.size(); ++k) m += static_cast<double>(k) * height_pmf[k];
  return m;
}

LadderLaw ladder_height_pmf(const Pmf1D& pmf, std::int64_t horizon, std::int64_t k_max) {
  if (horizon < 1) throw std::invalid_argument("ladder_height_pmf: horizon must be >= 1");
  if (k_max < 0) throw std::invalid_argument("ladder_height_pmf: K_max must be >= 0");
  if (pmf.atoms.empty() || std::abs(pmf.mean()) > 1e-10)
    throw std::invalid_argument("ladder_height_pmf: the walk must have mean zero");
  if (pmf.max_up() < 1) throw std::invalid_argument("ladder_height_pmf: the walk never moves up");

  const CrossingRun run = run_crossings(pmf, horizon);
  LadderLaw law;
  law.base = pmf;
  law.horizon = horizon;
  law.unfinished_mass = run.unfinished;
  law.height_pmf = extrapolate(run.height, run.last_profile, run.unfinished);
  const auto at_half = extrapolate(run.height_at_half, run.half_profile, run.unfinished_at_half);
  for (std::size_t k = 0; k < law.height_pmf.size(); ++k) law.residual += std::abs(law.height_pmf[k] - at_half[k]);
  if (law.residual > kLadderResidualTolerance)
    law.warnings.push_back("ladder height residual " + std::to_string(law.residual) + " exceeds " +
                           std::to_string(kLadderResidualTolerance) + "; raise the horizon");

  // u(m) = sum_k h(k) u(m - k), U = cumulative sum of u.
  std::vector<double> u(static_cast<std::size_t>(k_max + 1), 0.0);
  u[0] = 1.0;
  const std::int64_t top = static_cast<std::int64_t>(law.height_pmf.size()) - 1;
  for (std::int64_t m = 1; m <= k_max; ++m) {
    double s = 0.0;
    for (std::int64_t k = 1; k <= std::min(m, top); ++k)
      s += law.height_pmf[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(m - k)];
    u[static_cast<std::size_t>(m)] = s;
  }
  law.renewal.resize(u.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) law.renewal[m] = acc += u[m];
  return law;
}

double renewal_function(const LadderLaw& ladder, std::int64_t k) {
  if (k < 0) throw std::out_of_range("renewal_function: k must be >= 0");
  if (k > ladder.k_max())
    throw std::out_of_range("renewal_function: k = " + std::to_string(k) + " exceeds the table size " +
                            std::to_string(ladder.k_max()));
  return ladder.renewal[static_cast<std::size_t>(k)];
}

HalfLineHarmonic::HalfLineHarmonic(const Pmf1D& pmf, std::int64_t horizon, std::int64_t k_max)
    : pmf_(pmf), ladder_(ladder_height_pmf(pmf.flipped(), horizon, k_max)) {}

double HalfLineHarmonic::operator()(std::int64_t level) const {
  if (level <= 0) return 0.0;
  return renewal_function(ladder_, level - 1);
}

double HalfLineHarmonic::harmonicity_defect(std::int64_t level) const {
  double s = 0.0;
  for (auto [v, p] : pmf_.atoms) s += p * (*this)(level + v);
  return std::abs(s - (*this)(level));
}

double half_line_harmonic(const Pmf1D& pmf, std::int64_t level) {
  return HalfLineHarmonic(pmf, kDefaultLadderHorizon, std::max<std::int64_t>(kDefaultRenewalSize, level))(level);
}

double reversed_harmonic(const Pmf1D& pmf, std::int64_t level) { return half_line_harmonic(pmf.flipped(), level); }

}  // namespace conegreen
