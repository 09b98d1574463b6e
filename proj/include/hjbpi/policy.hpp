#pragma once

#include "hjbpi/control.hpp"
#include "hjbpi/pde.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace hjbpi {

struct IterationRecord {
  Index iter = 0;
  double policy_change = 0.0;  // sup over nodes of |u^{(i+1)} - u^{(i)}|
  double residual_sup = 0.0;   // interior sup of the HJB residual
  double residual_l2 = 0.0;    // interior RMS of the HJB residual
  double value_drop = 0.0;     // sup over nodes of V^{(i-1)} - V^{(i)}
  Index inner_steps = 0;
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double wall_time = 0.0;  // seconds
};

struct PolicyIterationOptions {
  double eps = 1e-6;
  Index max_outer = 200;
  /// Called with every value iterate V^{(0)}, V^{(1)}, ... (outer iterates in
  /// frozen-policy mode, pseudo-time steps in coupled mode).
  std::function<void(Index, const ValueField&)> on_value;
};

struct Solution {
  ValueField value;
  PolicyField policy;
  SolveReport report;
};

/// Policy iteration. In frozen-policy mode each outer iteration solves the
/// policy-evaluation equation to stationarity and then improves the policy;
/// it stops once the policy changes by less than eps. In coupled mode the
/// policy is refreshed after every implicit pseudo-time step, each step is
/// one record, the cap is cfg.inner_max steps, and convergence additionally
/// requires the value to be stationary.
///
/// Throws DivergenceError when the first evaluation diverges (inadmissible
/// u0) or when a coupled march blows up.
Solution policy_iteration(const GridProblem& gp, const PolicyField& u0,
                          const SchemeConfig& cfg, const PolicyIterationOptions& opt = {},
                          const std::optional<ValueField>& v0 = std::nullopt);

enum class ResidualStencil {
  Central,  // centred differences; measures the truncation error of a field
  Upwind,   // the scheme's own stencils; vanishes at a converged discrete solution
};

struct Residual {
  Vec r;  // NaN on boundary nodes
  double sup = 0.0;
  double l2 = 0.0;
};

/// Constrained HJB residual
///   grad V . (f + g u) + l + |u|_R^2 + 1/2 tr(g1^T D^2V g1) - lambda V,
///   u = P_U(-1/2 R^{-1} g^T grad V),
/// evaluated at interior nodes.
Residual hjb_residual(const GridProblem& gp, const Vec& v,
                      ResidualStencil stencil = ResidualStencil::Central);

struct Stage {
  double lambda;
  SchemeConfig cfg;
};

/// Solves a sequence of discounted problems with decreasing discount, ending
/// at lambda = 0, each warm-started from the previous (V, u). Returns one
/// solution per stage; the last one solves the undiscounted problem.
std::vector<Solution> warm_start_undiscount(const ProblemSpec& p, const Grid& grid,
                                            const std::vector<Stage>& stages,
                                            const PolicyIterationOptions& opt = {},
                                            std::optional<PolicyField> u0 = std::nullopt);

struct ConstrainedPair {
  Solution constrained;
  Solution unconstrained;
};

/// Solves with the given bounds and with bounds at +-infinity from the same u0.
ConstrainedPair compare_constrained(const ProblemSpec& p, const Grid& grid,
                                    const SchemeConfig& cfg,
                                    const PolicyIterationOptions& opt = {});

}  // namespace hjbpi
