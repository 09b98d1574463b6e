#pragma once

#include "hjbpi/discretization.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace hjbpi {

enum class SchemeMode {
  Coupled,       // policy refreshed from the value after every pseudo-time step
  FrozenPolicy,  // full policy evaluation between policy updates
};

enum class BoundaryRule {
  OneSided,       // interior-pointing differences, outward transport dropped
  FixedFromInit,  // face values held at the initial field (Dirichlet)
};

struct SchemeConfig {
  double dt = 2.0;
  /// Stationarity: sup|V^n - V^{n-1}| <= inner_tol * (1 + sup|V^n|).
  double inner_tol = 1e-8;
  Index inner_max = 50000;
  SchemeMode mode = SchemeMode::Coupled;
  /// Relaxation stops when sup_i |r_i / a_ii| <= relax_tol * (1 + sup|V|).
  double relax_tol = 1e-10;
  Index relax_max = 20000;
  double relax_omega = 1.0;
  BoundaryRule boundary = BoundaryRule::OneSided;
  double divergence_bound = 1e12;
};

void validate(const SchemeConfig& cfg);

/// Raised when the value iterates blow up or the policy traps positive cost.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Index node)
      : std::runtime_error(what), node_(node) {}
  Index node() const { return node_; }

 private:
  Index node_;
};

/// Row i:  diag_i V_i + sum_k (lower(k,i) V_{i-e_k} + upper(k,i) V_{i+e_k}) = rhs_i.
struct StencilSystem {
  Vec diag;
  Mat lower;
  Mat upper;
  Vec rhs;
  std::vector<char> fixed;  // Dirichlet rows
};

struct StepStats {
  Index sweeps = 0;
  double residual = 0.0;
};

/// One-sided differences along axis k; at faces both return the single
/// interior-pointing difference.
double forward_difference(const Grid& g, const Vec& v, Index i, int k);
double backward_difference(const Grid& g, const Vec& v, Index i, int k);

/// Gradient selected by the sign of the drift s = f + g u: forward where
/// s_k > 0, backward where s_k < 0. Where s_k == 0 the 1D sonic value
/// -2 R u_bar / g (u_bar = -f/g) is used, the central difference otherwise.
Mat upwind_gradient(const GridProblem& gp, const Vec& v, const PolicyField& u);

/// Gradient used for policy improvement. For each axis the forward candidate
/// is taken when the drift induced by the forward-difference policy points
/// forward, the backward candidate when the backward-difference policy's
/// drift points backward. When both qualify the one with the smaller axis
/// Hamiltonian wins. Otherwise the node is sonic in that axis and the slope
/// is the one at which the induced drift vanishes (-2 R u_bar / g in 1D).
Mat policy_gradient(const GridProblem& gp, const Vec& v);

/// Central differences in the interior, one-sided at faces.
Mat central_gradient(const GridProblem& gp, const Vec& v);

/// sum_k a_k(x_i) D^2_k v at an interior node. Throws at a face.
double diffusion_term(const GridProblem& gp, const Vec& v, Index i);

/// Drift of node i under control u_i.
Vec node_drift(const GridProblem& gp, const PolicyField& u, Index i);

/// Stationary operator applied to v under policy u, row by row:
///   -lambda v_i + transport_i + diffusion_i + l_i + u_i^T R u_i
/// using exactly the stencils of assemble(). Boundary rules match assemble().
Vec row_defect(const GridProblem& gp, const Vec& v, const PolicyField& u,
               BoundaryRule rule = BoundaryRule::OneSided);

/// Implicit pseudo-time system for V^n given V^{n-1} and a frozen policy.
/// Verifies the M-matrix property of every assembled row.
StencilSystem assemble(const GridProblem& gp, const Vec& v_prev, const PolicyField& u,
                       const SchemeConfig& cfg);

/// Throws std::logic_error naming the first row that is not diagonally
/// dominant with nonpositive off-diagonals and margin lambda + 1/dt.
void check_m_matrix(const StencilSystem& sys, double margin);

/// Tridiagonal elimination in 1D, alternating-direction Gauss-Seidel sweeps otherwise.
Vec solve_system(const Grid& g, const StencilSystem& sys, const Vec& guess,
                 const SchemeConfig& cfg, StepStats* stats = nullptr);

ValueField implicit_step(const GridProblem& gp, const ValueField& v_prev, const PolicyField& u,
                         const SchemeConfig& cfg, StepStats* stats = nullptr);

struct GhjbResult {
  ValueField value;
  Index steps = 0;
  bool stationary = false;
  double last_change = 0.0;
};

/// Marches implicit steps with a frozen policy until stationary. Throws
/// DivergenceError on blow-up, and for lambda == 0 when the policy leads some
/// node into a closed set of nodes that accrues positive cost forever.
GhjbResult ghjb_solve(const GridProblem& gp, const ValueField& v_init, const PolicyField& u,
                      const SchemeConfig& cfg);

/// For lambda == 0: a node whose discrete value is infinite under u (it can
/// reach a closed class of the upwind transition graph with positive cost).
std::optional<Index> trapped_cost_node(const GridProblem& gp, const PolicyField& u);

/// Shift so that V(origin) = 0 when the origin is a node.
void pin_origin(const GridProblem& gp, Vec& v);

}  // namespace hjbpi
