// Verification harness: scaled-ratio scans along rays and boundary paths,
// log-log exponent fits, Martin ratios and the local-limit shape check.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "conegreen/cone.hpp"
#include "conegreen/exact_dp.hpp"
#include "conegreen/step_models.hpp"

namespace conegreen {

inline constexpr double kPlateauTolerance = 0.15;

/// Horizon used for a target at distance |y|: factor * |y|^2, or a fixed N.
struct HorizonPolicy {
  bool scaled = true;
  double factor = 4.0;
  std::int64_t fixed = 1000;

  std::int64_t horizon_for(double modulus) const;
};

struct EvaluatorOptions {
  GreenMethod method = GreenMethod::dp;
  HorizonPolicy horizon;
  std::int64_t replicas = 100000;
  std::uint64_t seed = 1;
  double gamma = 0.5;
  int threads = 1;
  /// Add the fitted local-limit tail to DP values.
  bool add_tail = true;
  std::size_t memory_cap = default_memory_cap();
  /// auto: DP when cells * horizon * atoms stays below this.
  double dp_work_limit = 4e10;
};

/// Green function values for one start and many targets by a chosen method.
///
/// DP evaluates every target in one pass at the largest horizon; MC rows get
/// their own horizon and a child seed per row.
class GreenEvaluator {
 public:
  GreenEvaluator(StepDistribution dist, Cone cone, EvaluatorOptions options = {});

  const StepDistribution& dist() const noexcept { return dist_; }
  const Cone& cone() const noexcept { return cone_; }
  const EvaluatorOptions& options() const noexcept { return options_; }

  /// Method actually used for these targets (resolves auto).
  GreenMethod resolve(const Point& x, const std::vector<Point>& targets) const;
  std::vector<GreenEstimate> evaluate(const Point& x, const std::vector<Point>& targets) const;
  GreenEstimate evaluate(const Point& x, const Point& y) const;

 private:
  StepDistribution dist_;
  Cone cone_;
  EvaluatorOptions options_;
};

/// Nearest point to `target` that is inside the cone and reachable from x; ties go
/// to the lexicographically smallest. With `along`, only multiples of that vector are added.
std::optional<Point> snap_to_reachable(const StepDistribution& dist, const Cone& cone, const Point& x,
                                       const std::vector<double>& target, const Point* along = nullptr);

struct HarmonicOptions {
  std::int64_t replicas = 100000;
  std::uint64_t seed = 7;
  std::vector<std::int64_t> schedule{64, 256, 1024};
  int threads = 1;
};

/// V(x): exact renewal function for half-spaces, Monte Carlo E[u(x+S(n)); tau > n] otherwise.
double harmonic_V(const StepDistribution& dist, const Cone& cone, const Point& x, const HarmonicOptions& options = {});
/// V'(y) of the reversed walk; half-spaces only.
double reversed_harmonic_V(const StepDistribution& dist, const Cone& cone, const Point& y);

struct ScanRow {
  double requested = 0.0;  ///< requested modulus or path parameter
  Point target;
  double modulus = 0.0;  ///< |y| of the snapped target
  double green = 0.0;
  double stat_error = 0.0;
  double tail = 0.0;
  double scale = 0.0;  ///< factor multiplying green in the ratio
  double ratio = 0.0;
  double ratio_error = 0.0;
  bool usable = true;
  std::string note;
};

struct RatioScan {
  std::string tag;
  std::string direction;
  GreenMethod method = GreenMethod::dp;
  /// Limit the rows should approach when known (Martin ratio), else NaN.
  double reference = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScanRow> rows;
};

struct PlateauResult {
  bool pass = false;
  double max_change = 0.0;  ///< largest |r_{i+1}/r_i - 1| over consecutive usable rows
};

/// All consecutive usable rows agree within `tolerance` (needs two rows).
PlateauResult plateau_check(const RatioScan& scan, double tolerance = kPlateauTolerance);

struct ExponentFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::size_t points = 0;
  bool pass = false;
};

/// Least-squares slope of log(values) against log(moduli).
ExponentFit fit_exponent(const std::vector<double>& moduli, const std::vector<double>& values, double target,
                         double tolerance);

/// R = G |y|^{2p+d-2} / (V(x) u(y)) along direction * modulus.
RatioScan interior_ratio_scan(const GreenEvaluator& eval, const Point& x, const std::vector<double>& direction,
                              const std::vector<double>& moduli, double v_x);
/// Slope of log(G/u(y)) against log|y|, target -(2p+d-2).
ExponentFit interior_exponent_fit(const RatioScan& scan, const Cone& cone, double tolerance = 0.3);
/// Slope of log G against log|y| for the raw Green values of a scan.
ExponentFit raw_exponent_fit(const RatioScan& scan, double target, double tolerance);

/// G(x, y) / G(x', y); reference V(x)/V(x').
RatioScan martin_ratio_scan(const GreenEvaluator& eval, const Point& x, const Point& x_prime,
                            const std::vector<double>& direction, const std::vector<double>& moduli,
                            const HarmonicOptions& harmonic = {});
/// Martin rows pass when the last usable ratio is within `tolerance` of the reference.
bool martin_pass(const RatioScan& scan, double tolerance = kPlateauTolerance);

/// Targets m * along + height * wall_normal, with m the requested parameter.
RatioScan halfspace_ratio_scan(const GreenEvaluator& eval, const Point& x, std::int64_t height,
                               const std::vector<double>& along_values);

/// Targets at lattice distance `height` from the first wall, |y| growing along it.
RatioScan boundary_path_scan(const GreenEvaluator& eval, const Point& x, std::int64_t height,
                             const std::vector<double>& along_values);
/// Slope of log G along a boundary path, target -(p+d-1).
ExponentFit boundary_exponent_fit(const RatioScan& scan, const Cone& cone, double tolerance = 0.4);

struct VsigmaTable {
  std::vector<std::int64_t> distances;
  std::vector<Point> targets;
  std::vector<double> green;
  std::vector<double> profile;  ///< G M^{p+d-1} / V(x)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool increasing = false;
};

VsigmaTable vsigma_linearity(const GreenEvaluator& eval, const Point& x, double modulus,
                             const std::vector<std::int64_t>& distances, double v_x);

struct LltShape {
  std::int64_t n = 0;
  double constant = 0.0;      ///< fitted prefactor of n^{-p-d/2} ... see llt_profile
  double max_residual = 0.0;  ///< max |p_n / fit - 1| over the region
  std::size_t cells = 0;      ///< reachable cells with profile >= threshold * max
  Point argmax;               ///< cell where p_n is largest
  double argmax_profile_ratio = 0.0;  ///< profile(argmax) / max profile
  bool argmax_ok = false;             ///< ratio >= 0.95
};

/// u(y / sqrt(n)) exp(-y^T Sigma^{-1} y / (2n)).
double llt_profile(const StepDistribution& dist, const Cone& cone, const Point& y, std::int64_t n);

LltShape llt_shape_check(const StepDistribution& dist, const Cone& cone, const Point& x, std::int64_t n,
                         double threshold = 0.1, const DpOptions& options = {});

}  // namespace conegreen
