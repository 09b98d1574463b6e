#pragma once

#include "hjbpi/grid.hpp"
#include "hjbpi/problem.hpp"

namespace hjbpi {

/// A problem sampled on a grid: f, g, l and the axis-aligned diffusion
/// coefficients are evaluated once per node and reused by every sweep.
class GridProblem {
 public:
  GridProblem(ProblemSpec problem, Grid grid);
  explicit GridProblem(ProblemSpec problem);

  const ProblemSpec& problem() const { return problem_; }
  const Grid& grid() const { return grid_; }
  int dim() const { return problem_.dim; }
  int control_dim() const { return problem_.control_dim; }
  Index size() const { return grid_.size(); }
  double discount() const { return problem_.discount; }

  /// f(x_i), one column per node.
  auto drift(Index i) const { return f_.col(i); }
  /// g(x_i) as a d x m matrix.
  Eigen::Map<const Mat> input(Index i) const {
    return Eigen::Map<const Mat>(g_.col(i).data(), dim(), control_dim());
  }
  double state_cost(Index i) const { return ell_[i]; }
  /// a_k(x_i) = 1/2 sum_c g1_{kc}(x_i)^2, one column per node (zero when deterministic).
  auto diffusion(Index i) const { return diff_.col(i); }
  const Mat& diffusion() const { return diff_; }

  /// Flat index of the origin node, or -1.
  Index origin() const { return origin_; }

 private:
  ProblemSpec problem_;
  Grid grid_;
  Mat f_;
  Mat g_;
  Vec ell_;
  Mat diff_;
  Index origin_ = -1;
};

/// One control vector per node, stored column-wise (m x N).
struct PolicyField {
  Grid grid;
  Mat u;
};

/// One scalar per node.
struct ValueField {
  Grid grid;
  Vec v;
};

}  // namespace hjbpi
