#pragma once

#include "hjbpi/discretization.hpp"

#include <Eigen/Core>

namespace hjbpi {

/// Coordinate-wise clamp min(upper, max(lower, z)). For a diagonal weight R
/// this is the R-weighted orthogonal projection onto the box.
template <typename Derived, typename DerivedLo, typename DerivedHi>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_box(
    const Eigen::MatrixBase<Derived>& z, const Eigen::MatrixBase<DerivedLo>& lower,
    const Eigen::MatrixBase<DerivedHi>& upper) {
  return z.cwiseMax(lower).cwiseMin(upper);
}

/// Minimizer of  p^T g u + u^T R u  over the box:  P_U(-1/2 R^{-1} g^T p).
template <typename DerivedG, typename DerivedP>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1> control_law(
    const Eigen::MatrixBase<DerivedG>& g, const Eigen::MatrixBase<DerivedP>& grad,
    const Vec& weight, const Vec& lower, const Vec& upper) {
  const Vec raw = -0.5 * (g.transpose() * grad).cwiseQuotient(weight);
  return project_box(raw, lower, upper);
}

/// Policy from a per-node gradient (d x N): u_i = P_U(-1/2 R^{-1} g(x_i)^T grad_i).
/// Throws on a non-finite gradient.
PolicyField policy_update(const GridProblem& gp, const Mat& grad);

/// Sup over nodes and components of |a - b|.
double policy_distance(const PolicyField& a, const PolicyField& b);

/// True when every component lies in [lower, upper] at every node.
bool within_bounds(const PolicyField& u, const ProblemSpec& p);

/// u0(x) = P_U(-K g(x)^T x): saturated proportional feedback on the actuated
/// coordinates, used as the default admissible starting policy.
PolicyField proportional_policy(const GridProblem& gp, double gain = 5.0);

PolicyField zero_policy(const GridProblem& gp);

}  // namespace hjbpi
