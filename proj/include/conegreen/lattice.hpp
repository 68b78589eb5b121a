// Lattice points and small integer linear algebra for step supports.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace conegreen {

inline constexpr int kMaxDim = 8;

/// A point of Z^d with d <= kMaxDim, stored inline so walkers never allocate.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(check_dim(dim)) {}
  Point(std::initializer_list<std::int64_t> coords) : dim_(check_dim(static_cast<int>(coords.size()))) {
    int k = 0;
    for (auto c : coords) c_[k++] = c;
  }
  explicit Point(const std::vector<std::int64_t>& coords)
      : dim_(check_dim(static_cast<int>(coords.size()))) {
    for (int k = 0; k < dim_; ++k) c_[k] = coords[k];
  }

  int dim() const noexcept { return dim_; }
  std::int64_t& operator[](int k) noexcept { return c_[k]; }
  std::int64_t operator[](int k) const noexcept { return c_[k]; }

  Point& operator+=(const Point& o) noexcept {
    for (int k = 0; k < dim_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Point& operator-=(const Point& o) noexcept {
    for (int k = 0; k < dim_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator-(Point a) noexcept {
    for (int k = 0; k < a.dim_; ++k) a.c_[k] = -a.c_[k];
    return a;
  }
  friend Point operator*(std::int64_t s, Point a) noexcept {
    for (int k = 0; k < a.dim_; ++k) a.c_[k] *= s;
    return a;
  }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (int k = 0; k < a.dim_; ++k)
      if (a.c_[k] != b.c_[k]) return false;
    return true;
  }
  friend bool operator<(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    for (int k = 0; k < a.dim_; ++k)
      if (a.c_[k] != b.c_[k]) return a.c_[k] < b.c_[k];
    return false;
  }

  double norm2() const noexcept {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) s += static_cast<double>(c_[k]) * static_cast<double>(c_[k]);
    return s;
  }
  double norm() const noexcept { return std::sqrt(norm2()); }
  std::int64_t max_abs() const noexcept {
    std::int64_t m = 0;
    for (int k = 0; k < dim_; ++k) m = std::max<std::int64_t>(m, c_[k] < 0 ? -c_[k] : c_[k]);
    return m;
  }

  static Point zero(int dim) { return Point(dim); }
  static Point unit(int dim, int axis, std::int64_t sign = 1) {
    Point p(dim);
    p[axis] = sign;
    return p;
  }

  std::string to_string(char sep = ' ') const {
    std::string s;
    for (int k = 0; k < dim_; ++k) {
      if (k) s += sep;
      s += std::to_string(c_[k]);
    }
    return s;
  }

 private:
  static int check_dim(int d) {
    if (d < 1 || d > kMaxDim)
      throw std::invalid_argument("lattice dimension must be in [1, " + std::to_string(kMaxDim) +
                                  "], got " + std::to_string(d));
    return d;
  }

  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

/// Integer lattice spanned by a finite generating set, kept in row Hermite normal form.
///
/// Rows of the basis are upper triangular with positive pivots; membership is decided
/// by exact back-substitution. Used for the reachable sublattice of a step law.
class IntLattice {
 public:
  IntLattice() = default;
  IntLattice(int dim, const std::vector<Point>& generators);

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(basis_.size()); }
  bool full_rank() const noexcept { return rank() == dim_; }
  const std::vector<Point>& basis() const noexcept { return basis_; }

  bool contains(const Point& v) const;
  /// Index of the lattice in Z^d (product of pivots); 0 when not full rank.
  std::int64_t index() const noexcept;

 private:
  int dim_ = 0;
  std::vector<Point> basis_;
};

}  // namespace conegreen
