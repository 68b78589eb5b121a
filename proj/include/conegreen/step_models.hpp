// Lattice step distributions: constructors, moments, reachability, sampling,
// and the assumption report used before running any asymptotic check.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conegreen/lattice.hpp"
#include "conegreen/rng.hpp"

namespace conegreen {

class Cone;

struct Atom {
  Point step;
  double prob = 0.0;
};

/// Finite one-dimensional pmf, atoms sorted by value.
struct Pmf1D {
  std::vector<std::pair<std::int64_t, double>> atoms;

  double mean() const;
  double second_moment() const;
  std::int64_t max_up() const;    ///< largest positive jump (0 if none)
  std::int64_t max_down() const;  ///< largest negative jump, as a positive number
  Pmf1D flipped() const;
  /// Number of steps after which the walk's residue class repeats.
  std::int64_t period() const;
};

/// Reachability structure of the walk: S(n) lies in n*shift + sublattice.
struct PeriodDescriptor {
  IntLattice reach;       ///< Z-span of the support
  IntLattice sublattice;  ///< Z-span of differences of atoms
  Point shift;            ///< any support atom
  std::int64_t period = 0;  ///< order of shift modulo sublattice (0 if infinite)
  bool full_rank = false;
};

/// A lattice step law with finite support.
///
/// Invariants checked at construction: strictly positive probabilities that sum
/// to one within 1e-12, and a full-rank support. Mean and covariance are cached.
class StepDistribution {
 public:
  enum class Kind { simple, product, williamson, custom, derived };

  StepDistribution(int dim, std::vector<Atom> atoms, Kind kind = Kind::custom, std::string label = "custom");

  int dim() const noexcept { return dim_; }
  Kind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  /// Row-major d x d covariance.
  const std::vector<double>& covariance() const noexcept { return cov_; }
  double covariance(int i, int j) const noexcept { return cov_[i * dim_ + j]; }
  const PeriodDescriptor& period() const noexcept { return period_; }
  std::int64_t max_step() const noexcept { return max_step_; }
  /// Largest |s_k| over atoms along one axis.
  std::int64_t max_step(int axis) const noexcept;

  /// Tail exponent of the (untruncated) Williamson family this law truncates.
  std::optional<double> tail_exponent() const noexcept { return tail_exponent_; }
  void set_tail_exponent(double beta) { tail_exponent_ = beta; }

  /// Law of -X.
  StepDistribution reversed() const;
  /// Law of the coordinate X_axis.
  Pmf1D marginal(int axis) const;

  /// y - x lies in the Z-span of the support.
  bool reachable(const Point& from, const Point& to) const;
  /// x + S(n) = y is possible for some path of exactly n steps (ignoring killing).
  bool reachable_at(const Point& from, const Point& to, std::int64_t n) const;

  /// Draws one step by inversion of the cumulative table.
  const Point& sample(RandomStream& rng) const;

 private:
  int dim_;
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
  Kind kind_;
  std::string label_;
  std::vector<double> mean_;
  std::vector<double> cov_;
  PeriodDescriptor period_;
  std::int64_t max_step_ = 0;
  std::optional<double> tail_exponent_;
};

/// +-e_k, each with probability 1/(2d). Covariance (1/d) I.
StepDistribution make_simple_walk(int d);
/// Product of d independent copies of a mean-zero, unit-variance 1D law.
StepDistribution make_product_walk(const Pmf1D& pmf_1d, int d);
StepDistribution make_product_rademacher(int d);
/// Product of centred Binomial(4, 1/2) coordinates: lazy (holds w.p. 3/8) with unit variance.
StepDistribution make_product_lazy(int d);
/// Atoms +-2^n e_k, 1 <= n <= n_max, with P = q_n/(2d), q_n = c log(n+1) / 2^{n beta}.
StepDistribution make_williamson(int d, double tail_exponent, int n_max);

/// The unnormalised Williamson weights log(n+1) 2^{-n beta} and their normalising constant.
std::vector<double> williamson_weights(double tail_exponent, int n_max);

Pmf1D rademacher_pmf();
Pmf1D lazy_pmf();

/// E|X|^alpha, exact sum over atoms.
double moment(const StepDistribution& dist, double alpha);
/// E[ |X|^alpha / log^{1+eps}|X| ; |X| > 1 ].
double log_corrected_moment(const StepDistribution& dist, double alpha, double eps);

/// Pure form: returns the step together with the advanced state.
std::pair<Point, RandomStream> sample_step(const StepDistribution& dist, RandomStream rng);

struct AssumptionReport {
  bool mean_ok = false;
  bool covariance_identity_ok = false;
  std::vector<double> covariance;
  std::map<double, double> moment_values;
  double r1_threshold = 0.0;
  bool r1_ok = false;
  bool r1_plus_one_ok = false;  ///< moment condition of the boundary theorem
  double moment_alpha = 0.0;    ///< alpha of the moment assumption
  bool moment_ok = false;
  bool lattice_full_rank = false;
  std::int64_t period = 0;
  std::int64_t sublattice_index = 0;
  bool cone_convex = true;
  bool cone_smooth = true;
  std::vector<std::string> notes;

  bool all_ok() const;
};

/// r_1(p) = p + d - 2 + (2 - p)^+.
double r1_threshold(double p, int d);

AssumptionReport validate_assumptions(const StepDistribution& dist, const Cone& cone);

}  // namespace conegreen
