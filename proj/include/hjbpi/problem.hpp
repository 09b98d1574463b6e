#pragma once

#include "hjbpi/grid.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hjbpi {

/// Control-affine, time-invariant optimal control problem on a box domain.
///
///   dx = (f(x) + g(x) u) dt + g1(x) dW,   cost rate  l(x) + u^T R u,
///
/// discounted by exp(-lambda t). R is diagonal; the admissible controls form
/// the box [lower, upper] (entries may be infinite). A problem without a noise
/// map is deterministic.
struct ProblemSpec {
  std::string name;
  int dim = 1;
  int control_dim = 1;
  int noise_dim = 0;

  std::function<Vec(const Vec&)> drift;         // f : R^d -> R^d
  std::function<Mat(const Vec&)> input;         // g : R^d -> R^{d x m}
  std::function<Mat(const Vec&)> noise;         // g1: R^d -> R^{d x k}, may be empty
  std::function<double(const Vec&)> state_cost;  // l

  Vec control_weight;  // diagonal of R
  Vec lower;
  Vec upper;
  double discount = 0.0;

  Vec lo;
  Vec hi;
  std::vector<Index> nodes;

  /// Constant noise that does not vanish at the origin.
  bool additive_noise = false;

  bool stochastic() const { return static_cast<bool>(noise) && noise_dim > 0; }
  bool constrained() const;
};

enum class Builtin { Test1Det, Test1Stoch, Test2, Test3Det, Test3Stoch, Test4 };

ProblemSpec builtin(Builtin id);
ProblemSpec builtin(std::string_view name);
std::vector<std::string> builtin_names();

Grid default_grid(const ProblemSpec& p);

/// f(x) + g(x) u. Throws if u leaves the control box by more than 1e-12.
Vec eval_dynamics(const ProblemSpec& p, const Vec& x, const Vec& u);

/// l(x) + u^T R u.
double running_cost(const ProblemSpec& p, const Vec& x, const Vec& u);

/// Checks the structural invariants (dimensions, R > 0, lower <= 0 <= upper)
/// and, by sampling the domain, f(0) = 0, l(0) = 0, l > 0 away from 0 and,
/// unless the noise is flagged additive, g1(0) = 0. Throws on violation.
void validate(const ProblemSpec& p);

ProblemSpec unconstrained(ProblemSpec p);
ProblemSpec with_discount(ProblemSpec p, double lambda);
ProblemSpec with_nodes(ProblemSpec p, const std::vector<Index>& nodes);

/// Same problem with a noise map that is identically zero but still present,
/// so the stochastic code path is exercised.
ProblemSpec with_zero_noise(ProblemSpec p);

/// Equilibria of the uncontrolled Lorenz system. Only the origin for rho <= 1.
std::vector<Vec> lorenz_equilibria(double sigma, double rho, double beta);

}  // namespace hjbpi
