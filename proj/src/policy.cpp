#include "hjbpi/policy.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjbpi {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_bounded(const GridProblem& gp, const Vec& v, const SchemeConfig& cfg) {
  Index worst = -1;
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      worst = i;
      break;
    }
    if (std::abs(v[i]) > cfg.divergence_bound && (worst < 0 || std::abs(v[i]) > std::abs(v[worst])))
      worst = i;
  }
  if (worst < 0) return;
  std::ostringstream os;
  os << "value iteration diverged at node " << worst << ", x = ("
     << gp.grid().node(worst).transpose() << ")";
  throw DivergenceError(os.str(), worst);
}

PolicyField improve(const GridProblem& gp, const Vec& v) {
  return policy_update(gp, policy_gradient(gp, v));
}

IterationRecord make_record(const GridProblem& gp, Index iter, double change, const Vec& v,
                            double drop, Index steps) {
  const Residual res = hjb_residual(gp, v);
  return {iter, change, res.sup, res.l2, drop, steps};
}

Solution frozen_iteration(const GridProblem& gp, const PolicyField& u0, const SchemeConfig& cfg,
                          const PolicyIterationOptions& opt, Vec v) {
  Solution out;
  PolicyField u = u0;
  GhjbResult eval = ghjb_solve(gp, {gp.grid(), std::move(v)}, u, cfg);
  if (opt.on_value) opt.on_value(0, eval.value);
  double drop = 0.0;
  for (Index i = 0; i < opt.max_outer; ++i) {
    PolicyField next = improve(gp, eval.value.v);
    const double change = policy_distance(next, u);
    out.report.iterations.push_back(make_record(gp, i, change, eval.value.v, drop, eval.steps));
    u = std::move(next);
    if (change < opt.eps) {
      out.report.converged = true;
      break;
    }
    if (i + 1 == opt.max_outer) break;
    GhjbResult later = ghjb_solve(gp, eval.value, u, cfg);
    drop = (eval.value.v - later.value.v).maxCoeff();
    eval = std::move(later);
    if (opt.on_value) opt.on_value(i + 1, eval.value);
  }
  out.value = std::move(eval.value);
  out.policy = std::move(u);
  return out;
}

Solution coupled_iteration(const GridProblem& gp, const PolicyField& u0, const SchemeConfig& cfg,
                           const PolicyIterationOptions& opt, Vec v0) {
  Solution out;
  ValueField v{gp.grid(), std::move(v0)};
  PolicyField u = u0;
  const bool undiscounted = gp.discount() == 0.0;
  if (undiscounted && cfg.boundary == BoundaryRule::OneSided) {
    if (auto node = trapped_cost_node(gp, u0)) {
      std::ostringstream os;
      os << "initial policy is not admissible: node " << *node << ", x = ("
         << gp.grid().node(*node).transpose() << ") never reaches the origin";
      throw DivergenceError(os.str(), *node);
    }
  }
  if (opt.on_value) opt.on_value(0, v);
  for (Index n = 0; n < cfg.inner_max; ++n) {
    ValueField next = implicit_step(gp, v, u, cfg);
    check_bounded(gp, next.v, cfg);
    if (undiscounted) pin_origin(gp, next.v);
    PolicyField u_next = improve(gp, next.v);
    const double change = policy_distance(u_next, u);
    const double value_change = (next.v - v.v).cwiseAbs().maxCoeff();
    const double drop = (v.v - next.v).maxCoeff();
    v = std::move(next);
    u = std::move(u_next);
    out.report.iterations.push_back(make_record(gp, n, change, v.v, drop, 1));
    if (opt.on_value) opt.on_value(n + 1, v);
    if (change < opt.eps && value_change <= cfg.inner_tol * (1.0 + v.v.cwiseAbs().maxCoeff())) {
      out.report.converged = true;
      break;
    }
  }
  out.value = std::move(v);
  out.policy = std::move(u);
  return out;
}

}  // namespace

Solution policy_iteration(const GridProblem& gp, const PolicyField& u0, const SchemeConfig& cfg,
                          const PolicyIterationOptions& opt, const std::optional<ValueField>& v0) {
  validate(cfg);
  if (!(opt.eps > 0.0)) throw std::invalid_argument("policy_iteration: eps must be positive");
  if (opt.max_outer < 1) throw std::invalid_argument("policy_iteration: max_outer must be >= 1");
  if (u0.u.rows() != gp.control_dim() || u0.u.cols() != gp.size())
    throw std::invalid_argument("policy_iteration: initial policy has wrong shape");
  if (!within_bounds(u0, gp.problem()))
    throw std::invalid_argument("policy_iteration: initial policy violates the control bounds");
  Vec v = v0 ? v0->v : Vec::Zero(gp.size());
  if (v.size() != gp.size())
    throw std::invalid_argument("policy_iteration: initial value has wrong size");

  const auto t0 = std::chrono::steady_clock::now();
  Solution out = cfg.mode == SchemeMode::FrozenPolicy
                     ? frozen_iteration(gp, u0, cfg, opt, std::move(v))
                     : coupled_iteration(gp, u0, cfg, opt, std::move(v));
  out.report.wall_time = seconds_since(t0);
  return out;
}

Residual hjb_residual(const GridProblem& gp, const Vec& v, ResidualStencil stencil) {
  if (v.size() != gp.size()) throw std::invalid_argument("hjb_residual: field size mismatch");
  const auto& p = gp.problem();
  const Grid& g = gp.grid();
  Residual out;
  out.r = Vec::Constant(gp.size(), std::numeric_limits<double>::quiet_NaN());

  if (stencil == ResidualStencil::Upwind) {
    const PolicyField u = improve(gp, v);
    const Vec defect = row_defect(gp, v, u);
    for (Index i = 0; i < gp.size(); ++i)
      if (!g.on_boundary(i)) out.r[i] = defect[i];
  } else {
    const Mat grad = central_gradient(gp, v);
    for (Index i = 0; i < gp.size(); ++i) {
      if (g.on_boundary(i)) continue;
      const Vec u = control_law(gp.input(i), grad.col(i), p.control_weight, p.lower, p.upper);
      const Vec s = gp.drift(i) + gp.input(i) * u;
      out.r[i] = grad.col(i).dot(s) + gp.state_cost(i) + u.dot(p.control_weight.cwiseProduct(u)) +
                 diffusion_term(gp, v, i) - gp.discount() * v[i];
    }
  }

  Index count = 0;
  double sq = 0.0;
  for (Index i = 0; i < gp.size(); ++i) {
    if (std::isnan(out.r[i])) continue;
    out.sup = std::max(out.sup, std::abs(out.r[i]));
    sq += out.r[i] * out.r[i];
    ++count;
  }
  out.l2 = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  return out;
}

std::vector<Solution> warm_start_undiscount(const ProblemSpec& p, const Grid& grid,
                                            const std::vector<Stage>& stages,
                                            const PolicyIterationOptions& opt,
                                            std::optional<PolicyField> u0) {
  if (stages.empty() || stages.back().lambda != 0.0)
    throw std::invalid_argument("warm start: the discount schedule must end at 0");
  for (std::size_t s = 1; s < stages.size(); ++s)
    if (!(stages[s].lambda < stages[s - 1].lambda))
      throw std::invalid_argument("warm start: the discount schedule must be strictly descending");

  std::vector<Solution> out;
  std::optional<ValueField> v;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const GridProblem gp(with_discount(p, stages[s].lambda), grid);
    const PolicyField start = out.empty() ? (u0 ? *u0 : proportional_policy(gp)) : out.back().policy;
    try {
      out.push_back(policy_iteration(gp, start, stages[s].cfg, opt, v));
    } catch (const DivergenceError& e) {
      throw DivergenceError("warm start stage " + std::to_string(s) + ": " + e.what(), e.node());
    }
    v = out.back().value;
  }
  return out;
}

ConstrainedPair compare_constrained(const ProblemSpec& p, const Grid& grid,
                                    const SchemeConfig& cfg, const PolicyIterationOptions& opt) {
  const GridProblem con(p, grid);
  const GridProblem unc(unconstrained(p), grid);
  const PolicyField u0 = proportional_policy(con);
  return {policy_iteration(con, u0, cfg, opt), policy_iteration(unc, u0, cfg, opt)};
}

}  // namespace hjbpi
