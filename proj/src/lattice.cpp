#include "conegreen/lattice.hpp"

#include <algorithm>
#include <cstdlib>

namespace conegreen {

IntLattice::IntLattice(int dim, const std::vector<Point>& generators) : dim_(dim) {
  std::vector<Point> rows;
  for (const auto& g : generators) {
    if (g.dim() != dim) throw std::invalid_argument("IntLattice: generator dimension mismatch");
    rows.push_back(g);
  }
  for (int c = 0; c < dim; ++c) {
    // Euclid on column c until at most one row has a nonzero entry there.
    for (;;) {
      std::vector<std::size_t> live;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i][c] != 0) live.push_back(i);
      if (live.size() <= 1) break;
      auto piv = *std::min_element(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
        return std::llabs(rows[a][c]) < std::llabs(rows[b][c]);
      });
      for (auto i : live) {
        if (i == piv) continue;
        const std::int64_t q = rows[i][c] / rows[piv][c];
        rows[i] -= q * rows[piv];
      }
    }
    auto it = std::find_if(rows.begin(), rows.end(), [c](const Point& r) { return r[c] != 0; });
    if (it != rows.end()) {
      Point r = *it;
      if (r[c] < 0) r = -r;
      basis_.push_back(r);
      rows.erase(it);
    }
  }
}

bool IntLattice::contains(const Point& v) const {
  if (v.dim() != dim_) return false;
  Point rest = v;
  std::size_t b = 0;
  for (int c = 0; c < dim_; ++c) {
    if (b < basis_.size() && basis_[b][c] != 0) {
      const std::int64_t piv = basis_[b][c];
      if (rest[c] % piv != 0) return false;
      rest -= (rest[c] / piv) * basis_[b];
      ++b;
    } else if (rest[c] != 0) {
      return false;
    }
  }
  return true;
}

std::int64_t IntLattice::index() const noexcept {
  if (!full_rank()) return 0;
  std::int64_t det = 1;
  int c = 0;
  for (const auto& row : basis_) {
    while (row[c] == 0) ++c;
    det *= row[c];
    ++c;
  }
  return det;
}

}  // namespace conegreen
