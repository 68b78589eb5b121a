// One-dimensional fluctuation theory: ladder heights, renewal functions and the
// harmonic functions of walks killed on leaving the half-line.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conegreen/step_models.hpp"

namespace conegreen {

inline constexpr std::int64_t kDefaultLadderHorizon = 10000;
inline constexpr std::int64_t kDefaultRenewalSize = 1024;
/// Residual above which a ladder law carries a warning.
inline constexpr double kLadderResidualTolerance = 1e-6;

/// First strict ascending ladder height of a 1D walk and its renewal function.
struct LadderLaw {
  Pmf1D base;
  /// height_pmf[k] = P(H = k); entry 0 is always 0.
  std::vector<double> height_pmf;
  /// P(H not reached within the horizon), before extrapolation.
  double unfinished_mass = 0.0;
  /// L1 change of height_pmf between horizon/2 and horizon.
  double residual = 0.0;
  std::int64_t horizon = 0;
  /// renewal[k] = U(k), k = 0..K_max.
  std::vector<double> renewal;
  std::vector<std::string> warnings;

  std::int64_t k_max() const noexcept { return static_cast<std::int64_t>(renewal.size()) - 1; }
  double mean_height() const;
};

/// Ladder law from a killed DP on the non-positive half-line.
///
/// Mass still below zero at the horizon is distributed like the overshoot of
/// the last period of crossings.
LadderLaw ladder_height_pmf(const Pmf1D& pmf, std::int64_t horizon = kDefaultLadderHorizon,
                            std::int64_t k_max = kDefaultRenewalSize);

/// U(k) = sum_{j>=0} P(H_1 + ... + H_j <= k); U(0) = 1. Throws std::out_of_range past the table.
double renewal_function(const LadderLaw& ladder, std::int64_t k);

/// Harmonic function of the walk killed on leaving {1, 2, ...}, with V(1) = 1.
///
/// Built from the strict descending ladder, i.e. the ascending ladder of -X.
class HalfLineHarmonic {
 public:
  explicit HalfLineHarmonic(const Pmf1D& pmf, std::int64_t horizon = kDefaultLadderHorizon,
                            std::int64_t k_max = kDefaultRenewalSize);

  /// V(level) for 1 <= level <= K_max + 1; 0 for level <= 0.
  double operator()(std::int64_t level) const;
  const LadderLaw& ladder() const noexcept { return ladder_; }
  std::int64_t max_level() const noexcept { return ladder_.k_max() + 1; }
  /// |E[V(level + X); level + X > 0] - V(level)|.
  double harmonicity_defect(std::int64_t level) const;

 private:
  Pmf1D pmf_;
  LadderLaw ladder_;
};

/// V(level) for the walk itself.
double half_line_harmonic(const Pmf1D& pmf, std::int64_t level);
/// V'(level): the same for the reversed walk -X.
double reversed_harmonic(const Pmf1D& pmf, std::int64_t level);

}  // namespace conegreen
