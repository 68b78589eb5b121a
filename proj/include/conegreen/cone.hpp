// Analytic cones: membership, boundary distance, exponent p and harmonic u.
#pragma once

#include <string>

#include "conegreen/lattice.hpp"

namespace conegreen {

/// Tolerance (relative to |x|) under which a point counts as lying on a wedge wall.
inline constexpr double kWallTolerance = 1e-9;

/// Cone K with its principal Dirichlet data.
///
/// u is normalised so that m_1 has unit sup on the spherical section. The
/// full space is included as a degenerate cone (p = 0, u = 1) for free walks.
class Cone {
 public:
  enum class Kind { half_space, wedge, orthant, full_space };

  static Cone half_space(int d);
  /// Planar wedge {0 < theta < opening}, first wall along +e_1.
  static Cone wedge(double opening);
  static Cone orthant(int d);
  static Cone full_space(int d);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double opening() const noexcept { return opening_; }
  double lambda1() const noexcept { return lambda1_; }
  double p() const noexcept { return p_; }
  bool convex() const noexcept;
  /// C^2 boundary (orthants in d >= 2 have corners).
  bool smooth() const noexcept;
  std::string name() const;

  /// Strictly inside; the boundary counts as outside.
  bool contains(const Point& x) const;
  double dist_boundary(const Point& x) const;
  double harmonic_u(const Point& x) const;

  /// Lattice frame of the first wall: unit vector along the wall and inward normal.
  Point wall_direction() const;
  Point wall_normal() const;

 private:
  Cone(Kind kind, int dim, double opening, double lambda1, double p)
      : kind_(kind), dim_(dim), opening_(opening), lambda1_(lambda1), p_(p) {}

  Kind kind_;
  int dim_;
  double opening_;
  double lambda1_;
  double p_;
};

/// p = sqrt(lambda1 + (d/2 - 1)^2) - (d/2 - 1).
double exponent_from_lambda(double lambda1, int d);

inline double exponent_p(const Cone& cone) { return cone.p(); }
inline double lambda1(const Cone& cone) { return cone.lambda1(); }

}  // namespace conegreen
