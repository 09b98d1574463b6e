#include "hjbpi/control.hpp"

#include <stdexcept>
#include <string>

namespace hjbpi {

PolicyField policy_update(const GridProblem& gp, const Mat& grad) {
  const auto& p = gp.problem();
  if (grad.rows() != gp.dim() || grad.cols() != gp.size())
    throw std::invalid_argument("policy_update: gradient has wrong shape");
  PolicyField out{gp.grid(), Mat(gp.control_dim(), gp.size())};
  for (Index i = 0; i < gp.size(); ++i) {
    if (!grad.col(i).allFinite())
      throw std::domain_error("policy_update: non-finite gradient at node " + std::to_string(i));
    out.u.col(i) = control_law(gp.input(i), grad.col(i), p.control_weight, p.lower, p.upper);
  }
  return out;
}

double policy_distance(const PolicyField& a, const PolicyField& b) {
  if (a.u.rows() != b.u.rows() || a.u.cols() != b.u.cols())
    throw std::invalid_argument("policy_distance: shape mismatch");
  if (a.u.size() == 0) return 0.0;
  return (a.u - b.u).cwiseAbs().maxCoeff();
}

bool within_bounds(const PolicyField& u, const ProblemSpec& p) {
  for (Index i = 0; i < u.u.cols(); ++i) {
    if ((u.u.col(i).array() < p.lower.array()).any()) return false;
    if ((u.u.col(i).array() > p.upper.array()).any()) return false;
  }
  return true;
}

PolicyField proportional_policy(const GridProblem& gp, double gain) {
  const auto& p = gp.problem();
  PolicyField out{gp.grid(), Mat(gp.control_dim(), gp.size())};
  for (Index i = 0; i < gp.size(); ++i) {
    const Vec x = gp.grid().node(i);
    out.u.col(i) = project_box(-gain * (gp.input(i).transpose() * x), p.lower, p.upper);
  }
  return out;
}

PolicyField zero_policy(const GridProblem& gp) {
  return {gp.grid(), Mat::Zero(gp.control_dim(), gp.size())};
}

}  // namespace hjbpi
