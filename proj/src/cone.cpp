#include "conegreen/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace conegreen {

namespace {

void require_dim(int d, int min_d) {
  if (d < min_d || d > kMaxDim)
    throw std::invalid_argument("cone dimension " + std::to_string(d) + " out of range");
}

double distance_to_ray(double px, double py, double dx, double dy) {
  const double t = std::max(0.0, px * dx + py * dy);
  const double ex = px - t * dx;
  const double ey = py - t * dy;
  return std::hypot(ex, ey);
}

}  // namespace

double exponent_from_lambda(double lambda1, int d) {
  const double shift = d / 2.0 - 1.0;
  return std::sqrt(lambda1 + shift * shift) - shift;
}

Cone Cone::half_space(int d) {
  require_dim(d, 1);
  const double lam = d - 1.0;
  return Cone(Kind::half_space, d, std::numbers::pi, lam, exponent_from_lambda(lam, d));
}

Cone Cone::wedge(double opening) {
  if (!(opening > 0.0 && opening < 2.0 * std::numbers::pi))
    throw std::invalid_argument("wedge opening must lie in (0, 2*pi), got " + std::to_string(opening));
  const double q = std::numbers::pi / opening;
  return Cone(Kind::wedge, 2, opening, q * q, exponent_from_lambda(q * q, 2));
}

Cone Cone::orthant(int d) {
  require_dim(d, 1);
  const double lam = 2.0 * d * (d - 1.0);
  return Cone(Kind::orthant, d, d == 1 ? std::numbers::pi : std::numbers::pi / 2, lam,
              d == 1 ? 1.0 : exponent_from_lambda(lam, d));
}

Cone Cone::full_space(int d) {
  require_dim(d, 1);
  return Cone(Kind::full_space, d, 2.0 * std::numbers::pi, 0.0, 0.0);
}

bool Cone::convex() const noexcept {
  return kind_ != Kind::wedge || opening_ <= std::numbers::pi;
}

bool Cone::smooth() const noexcept {
  switch (kind_) {
    case Kind::half_space:
    case Kind::full_space:
      return true;
    case Kind::orthant:
      return dim_ == 1;
    case Kind::wedge:
      return std::abs(opening_ - std::numbers::pi) < 1e-12;
  }
  return false;
}

std::string Cone::name() const {
  switch (kind_) {
    case Kind::half_space:
      return "halfspace(d=" + std::to_string(dim_) + ")";
    case Kind::wedge:
      return "wedge(beta=" + std::to_string(opening_) + ")";
    case Kind::orthant:
      return "orthant(d=" + std::to_string(dim_) + ")";
    case Kind::full_space:
      return "fullspace(d=" + std::to_string(dim_) + ")";
  }
  return "?";
}

bool Cone::contains(const Point& x) const {
  if (x.dim() != dim_) throw std::invalid_argument("cone/point dimension mismatch");
  switch (kind_) {
    case Kind::half_space:
      return x[dim_ - 1] > 0;
    case Kind::orthant:
      for (int k = 0; k < dim_; ++k)
        if (x[k] <= 0) return false;
      return true;
    case Kind::full_space:
      return true;
    case Kind::wedge: {
      if (x[0] == 0 && x[1] == 0) return false;
      const double px = static_cast<double>(x[0]);
      const double py = static_cast<double>(x[1]);
      const double r = std::hypot(px, py);
      // Signed distances to the two wall lines decide strict membership robustly.
      const double c = std::cos(opening_);
      const double s = std::sin(opening_);
      const double off_first = py;               // cross(e1, x)
      const double off_second = px * s - py * c;  // cross(x, w)
      const double tol = kWallTolerance * r;
      if (std::abs(off_first) <= tol && px > 0) return false;
      if (std::abs(off_second) <= tol && px * c + py * s > 0) return false;
      double theta = std::atan2(py, px);
      if (theta < 0) theta += 2.0 * std::numbers::pi;
      return theta > 0.0 && theta < opening_;
    }
  }
  return false;
}

double Cone::dist_boundary(const Point& x) const {
  if (x.dim() != dim_) throw std::invalid_argument("cone/point dimension mismatch");
  switch (kind_) {
    case Kind::half_space:
      return std::abs(static_cast<double>(x[dim_ - 1]));
    case Kind::orthant: {
      if (contains(x)) {
        std::int64_t m = x[0];
        for (int k = 1; k < dim_; ++k) m = std::min(m, x[k]);
        return static_cast<double>(m);
      }
      double s = 0.0;
      for (int k = 0; k < dim_; ++k)
        if (x[k] < 0) s += static_cast<double>(x[k]) * static_cast<double>(x[k]);
      return std::sqrt(s);
    }
    case Kind::full_space:
      return std::numeric_limits<double>::infinity();
    case Kind::wedge: {
      const double px = static_cast<double>(x[0]);
      const double py = static_cast<double>(x[1]);
      const double d1 = distance_to_ray(px, py, 1.0, 0.0);
      const double d2 = distance_to_ray(px, py, std::cos(opening_), std::sin(opening_));
      const double d = std::min(d1, d2);
      return d <= kWallTolerance * std::hypot(px, py) ? 0.0 : d;
    }
  }
  return 0.0;
}

double Cone::harmonic_u(const Point& x) const {
  if (!contains(x)) return 0.0;
  switch (kind_) {
    case Kind::half_space:
      return static_cast<double>(x[dim_ - 1]);
    case Kind::orthant: {
      double u = std::pow(static_cast<double>(dim_), dim_ / 2.0);
      for (int k = 0; k < dim_; ++k) u *= static_cast<double>(x[k]);
      return u;
    }
    case Kind::full_space:
      return 1.0;
    case Kind::wedge: {
      const double px = static_cast<double>(x[0]);
      const double py = static_cast<double>(x[1]);
      double theta = std::atan2(py, px);
      if (theta < 0) theta += 2.0 * std::numbers::pi;
      const double r = std::hypot(px, py);
      return std::pow(r, p_) * std::sin(p_ * theta);
    }
  }
  return 0.0;
}

Point Cone::wall_direction() const {
  if (kind_ == Kind::full_space) throw std::logic_error("full space has no wall");
  if (dim_ == 1) throw std::logic_error("half-line boundary is a point");
  return Point::unit(dim_, 0);
}

Point Cone::wall_normal() const {
  if (kind_ == Kind::full_space) throw std::logic_error("full space has no wall");
  return Point::unit(dim_, kind_ == Kind::half_space ? dim_ - 1 : 1);
}

}  // namespace conegreen
