// Replicated simulation: survival, occupation counts, harmonic-function
// estimates and exponentially tilted importance sampling.
//
// Replica r of a run with seed s draws from RandomStream(s, r), so results do
// not depend on how replicas are spread over threads. Replicas are grouped in
// fixed blocks whose moments are merged by a pairwise tree.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conegreen/cone.hpp"
#include "conegreen/step_models.hpp"

namespace conegreen {

inline constexpr std::int64_t kReplicaBlock = 1024;

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t replicas = 0;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  std::string method = "plain";
};

/// Running count / mean / centred sum of squares.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) noexcept;
  static Moments merge(const Moments& a, const Moments& b) noexcept;
  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_of_mean() const noexcept;
};

/// Runs `sample` once per replica and returns per-component moments.
/// `sample` writes `width` values for the replica it is given.
std::vector<Moments> replicate(std::int64_t replicas, std::uint64_t seed, int threads, std::size_t width,
                               const std::function<void(RandomStream&, double*)>& sample);

McEstimate mc_survival(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t n,
                       std::int64_t replicas, std::uint64_t seed, int threads = 1);

/// Mean number of visits to y at times 0..horizon before leaving the cone.
McEstimate mc_green(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                    std::int64_t horizon, std::int64_t replicas, std::uint64_t seed, int threads = 1);

/// Exponential tilt along one signed coordinate axis with the axis coordinate truncated at gamma*y1.
struct TiltSpec {
  int axis = 0;
  int sign = 1;
  double y1 = 0.0;
  double gamma = 0.0;
  double truncation = 0.0;  ///< gamma * y1
  std::int64_t n = 0;       ///< time scale the tilt is tuned for
  double h = 0.0;
  double phi = 0.0;              ///< E[e^{h X1}; |X1| <= gamma y1]
  double kept_mass = 0.0;        ///< P(|X1| <= gamma y1)
  double trunc_first = 0.0;      ///< E[X1; |X1| <= gamma y1]
  double trunc_second = 0.0;     ///< E[X1^2; |X1| <= gamma y1]
  double tilted_mean = 0.0;      ///< mean of X1 under the tilted law
  double tilted_variance = 0.0;  ///< variance of X1 under the tilted law
};

/// h = log(1 + gamma y1^2 / (n E[X1^2; |X1| <= gamma y1])) / (gamma y1), X1 = sign * X_axis.
TiltSpec tilt_parameters(const StepDistribution& dist, double y1, double gamma, std::int64_t n, int axis = 0,
                         int sign = 1);
/// TiltSpec for an explicitly chosen h.
TiltSpec tilt_with_h(const StepDistribution& dist, double y1, double gamma, double h, int axis = 0, int sign = 1);

/// exp{-h y1 + h n E[X1; .] + (e^{h gamma y1} - 1 - h gamma y1) n E[X1^2; .] / (gamma y1)^2}.
double fuk_nagaev_bound(const StepDistribution& dist, double y1, double gamma, std::int64_t n, double h, int axis = 0,
                        int sign = 1);
/// e^{-h y1} phi(h)^n.
double tilted_weight_bound(const TiltSpec& tilt, std::int64_t n);

struct TiltOptions {
  std::optional<double> forced_h;
  std::optional<std::int64_t> tilt_time;  ///< default ceil(|y - x|^2 / 2)
  std::optional<int> axis;                ///< default: largest |y_k - x_k|
  int threads = 1;
};

struct TiltedEstimate {
  McEstimate estimate;  ///< Green sum restricted to paths without a truncated jump
  TiltSpec tilt;
  /// Upper bound on the part carried by paths with a truncated jump: q N (N + 1) / 2, q = P(|X1| > gamma y1).
  double remainder_bound = 0.0;
};

TiltedEstimate mc_green_tilted(const StepDistribution& dist, const Cone& cone, const Point& x, const Point& y,
                               std::int64_t horizon, double gamma, std::int64_t replicas, std::uint64_t seed,
                               const TiltOptions& options = {});

struct VEstimate {
  std::vector<std::int64_t> schedule;
  std::vector<double> values;
  std::vector<double> stderrs;
  double value = 0.0;
  double stderr_ = 0.0;
  bool plateau = false;  ///< relative change over the last two schedule points below 5%
};

/// E[u(x + S(n)); tau_x > n] along a schedule of times, all from the same paths.
VEstimate estimate_V(const StepDistribution& dist, const Cone& cone, const Point& x,
                     std::vector<std::int64_t> schedule, std::int64_t replicas, std::uint64_t seed, int threads = 1);

}  // namespace conegreen
