#include "hjbpi/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hjbpi {

Grid::Grid(Vec lo, Vec hi, std::vector<Index> counts)
    : lo_(std::move(lo)), hi_(std::move(hi)), counts_(std::move(counts)) {
  const auto d = lo_.size();
  if (hi_.size() != d || static_cast<Index>(counts_.size()) != d)
    throw std::invalid_argument("grid: lo, hi and counts must have the same dimension");
  if (d < 1 || d > 3) throw std::invalid_argument("grid: dimension must be 1, 2 or 3");
  spacing_.resize(d);
  strides_.assign(d, 1);
  for (Index k = 0; k < d; ++k) {
    if (!(lo_[k] < hi_[k]))
      throw std::invalid_argument("grid: lo must be strictly below hi in dimension " +
                                  std::to_string(k));
    if (counts_[k] < 3)
      throw std::invalid_argument("grid: at least 3 nodes per dimension are required");
    spacing_[k] = (hi_[k] - lo_[k]) / static_cast<double>(counts_[k] - 1);
  }
  for (Index k = d - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * counts_[k + 1];
  total_ = strides_[0] * counts_[0];
}

Index Grid::flat(const MultiIndex& i) const {
  if (i.size() != dim()) throw std::out_of_range("grid: multi-index has wrong dimension");
  Index j = 0;
  for (int k = 0; k < dim(); ++k) {
    if (i[k] < 0 || i[k] >= counts_[k]) throw std::out_of_range("grid: index out of range");
    j += i[k] * strides_[k];
  }
  return j;
}

MultiIndex Grid::multi(Index flat) const {
  if (flat < 0 || flat >= total_) throw std::out_of_range("grid: flat index out of range");
  MultiIndex i(dim());
  for (int k = 0; k < dim(); ++k) i[k] = axis_index(flat, k);
  return i;
}

double Grid::coordinate(int k, Index ik) const {
  // The last node is pinned to hi so the domain bounds are reproduced exactly.
  if (ik == counts_[k] - 1) return hi_[k];
  return lo_[k] + static_cast<double>(ik) * spacing_[k];
}

Vec Grid::node(Index flat) const {
  Vec x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = coordinate(k, axis_index(flat, k));
  return x;
}

bool Grid::on_boundary(Index flat) const {
  for (int k = 0; k < dim(); ++k)
    if (at_low(flat, k) || at_high(flat, k)) return true;
  return false;
}

Index Grid::origin() const {
  MultiIndex i(dim());
  for (int k = 0; k < dim(); ++k) {
    const double r = -lo_[k] / spacing_[k];
    const double ri = std::round(r);
    if (ri < 0 || ri > static_cast<double>(counts_[k] - 1)) return -1;
    if (coordinate(k, static_cast<Index>(ri)) != 0.0) return -1;
    i[k] = static_cast<Index>(ri);
  }
  return flat(i);
}

bool Grid::operator==(const Grid& o) const {
  return lo_ == o.lo_ && hi_ == o.hi_ && counts_ == o.counts_;
}

Grid make_grid(const Vec& lo, const Vec& hi, const std::vector<Index>& counts) {
  return Grid(lo, hi, counts);
}

NodeClass classify(const MultiIndex& i, const Grid& g) {
  g.flat(i);  // range check
  NodeClass c;
  for (int k = 0; k < g.dim(); ++k) {
    if (i[k] == 0) c.faces.push_back({k, Side::Low});
    if (i[k] == g.count(k) - 1) c.faces.push_back({k, Side::High});
  }
  c.interior = c.faces.empty();
  return c;
}

}  // namespace hjbpi
