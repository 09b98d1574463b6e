#pragma once

#include "hjbpi/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace hjbpi {

/// V(x) = p x^2 for  dx = (a x + b u) dt,  cost  x^2 + R u^2,  discount lambda.
template <typename Scalar = double>
struct RiccatiRef {
  Scalar p_star;
  Scalar a, b, R, lambda;

  /// Left-hand side of the scalar identity  (2a - lambda) p - (b^2/R) p^2 + 1 = 0.
  Scalar identity_residual() const {
    return (Scalar(2) * a - lambda) * p_star - (b * b / R) * p_star * p_star + Scalar(1);
  }
};

/// Positive root of (b^2/R) p^2 + (lambda - 2a) p - 1 = 0.
template <typename Scalar = double>
RiccatiRef<Scalar> riccati_1d(Scalar a, Scalar b, Scalar R, Scalar lambda) {
  if (b == Scalar(0) || !(R > Scalar(0)))
    throw std::invalid_argument("riccati_1d: need b != 0 and R > 0");
  const Scalar A = b * b / R;
  const Scalar B = lambda - Scalar(2) * a;
  // Cancellation-free form of (-B + sqrt(B^2 + 4A)) / (2A).
  const Scalar disc = std::sqrt(B * B + Scalar(4) * A);
  const Scalar p = B <= Scalar(0) ? (-B + disc) / (Scalar(2) * A) : Scalar(2) / (B + disc);
  return {p, a, b, R, lambda};
}

struct QuadraticFit {
  double p = 0.0;
  double max_rel_dev = 0.0;  // max |v - p x^2| / (p x^2) over the window, x != 0
  Index nodes = 0;
};

/// Least-squares fit v(x) ~ p x^2 over the nodes with |x| <= window (1D).
QuadraticFit fit_quadratic(const ValueField& v, double window);

/// Constrained solve on a grid refined by `refine` (nodes (n-1)*refine+1 per
/// axis), restricted back to the coarse nodes.
ValueField fine_grid_reference(const ProblemSpec& p, const Grid& coarse, int refine,
                               const SchemeConfig& cfg, const PolicyIterationOptions& opt = {});

/// Coarse-node restriction of a field given on a grid refined by `refine`.
ValueField restrict_field(const ValueField& fine, const Grid& coarse, int refine);

}  // namespace hjbpi
