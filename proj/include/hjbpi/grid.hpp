#pragma once

#include <Eigen/Core>

#include <vector>

namespace hjbpi {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Multi-index into a grid of at most three dimensions.
using MultiIndex = Eigen::Matrix<Index, Eigen::Dynamic, 1, 0, 3, 1>;

enum class Side { Low, High };

struct Face {
  int dim;
  Side side;
  bool operator==(const Face&) const = default;
};

struct NodeClass {
  bool interior = true;
  std::vector<Face> faces;
};

/// Uniform tensor-product grid over a box. Nodes are enumerated in row-major
/// order (last dimension fastest). Immutable after construction.
class Grid {
 public:
  Grid() = default;
  Grid(Vec lo, Vec hi, std::vector<Index> counts);

  int dim() const { return static_cast<int>(lo_.size()); }
  Index size() const { return total_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Vec& spacing() const { return spacing_; }
  double spacing(int k) const { return spacing_[k]; }
  Index count(int k) const { return counts_[k]; }
  const std::vector<Index>& counts() const { return counts_; }
  Index stride(int k) const { return strides_[k]; }

  Index flat(const MultiIndex& i) const;
  MultiIndex multi(Index flat) const;

  /// Position of the node along axis k.
  Index axis_index(Index flat, int k) const { return (flat / strides_[k]) % counts_[k]; }
  double coordinate(int k, Index ik) const;

  Vec node(Index flat) const;
  Vec node(const MultiIndex& i) const { return node(flat(i)); }

  bool at_low(Index flat, int k) const { return axis_index(flat, k) == 0; }
  bool at_high(Index flat, int k) const { return axis_index(flat, k) == counts_[k] - 1; }
  bool on_boundary(Index flat) const;

  /// Flat index of the node sitting exactly at the origin, or -1.
  Index origin() const;

  bool operator==(const Grid& o) const;

 private:
  Vec lo_, hi_, spacing_;
  std::vector<Index> counts_;
  std::vector<Index> strides_;
  Index total_ = 0;
};

Grid make_grid(const Vec& lo, const Vec& hi, const std::vector<Index>& counts);

NodeClass classify(const MultiIndex& i, const Grid& g);

}  // namespace hjbpi
