#include "hjbpi/discretization.hpp"

#include <stdexcept>

namespace hjbpi {

GridProblem::GridProblem(ProblemSpec problem) : GridProblem(problem, default_grid(problem)) {}

GridProblem::GridProblem(ProblemSpec problem, Grid grid)
    : problem_(std::move(problem)), grid_(std::move(grid)) {
  validate(problem_);
  const int d = problem_.dim, m = problem_.control_dim;
  if (grid_.dim() != d) throw std::invalid_argument("grid and problem dimensions differ");
  const Index n = grid_.size();
  f_.resize(d, n);
  g_.resize(d * m, n);
  ell_.resize(n);
  diff_ = Mat::Zero(d, n);
  for (Index i = 0; i < n; ++i) {
    const Vec x = grid_.node(i);
    f_.col(i) = problem_.drift(x);
    const Mat g = problem_.input(x);
    g_.col(i) = Eigen::Map<const Vec>(g.data(), d * m);
    ell_[i] = problem_.state_cost(x);
    if (problem_.stochastic()) {
      const Mat g1 = problem_.noise(x);
      for (Index c = 0; c < g1.cols(); ++c) {
        Index nonzero = 0;
        for (int k = 0; k < d; ++k) nonzero += g1(k, c) != 0.0;
        if (nonzero > 1)
          throw std::invalid_argument("noise channels must be axis-aligned (no cross diffusion)");
      }
      diff_.col(i) = 0.5 * g1.rowwise().squaredNorm();
    }
  }
  origin_ = grid_.origin();
}

}  // namespace hjbpi
