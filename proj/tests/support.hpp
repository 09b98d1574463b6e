#pragma once

#include "hjbpi/problem.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace hjbpi::testing {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// dx = (a x + b u) dt, cost x^2 + R u^2, on (-2, 2).
inline ProblemSpec linear_1d(double a, double b, double R, double lambda, double bound,
                             Index nodes = 401) {
  ProblemSpec p;
  p.name = "linear";
  p.drift = [a](const Vec& x) { return Vec::Constant(1, a * x[0]); };
  p.input = [b](const Vec&) { return Mat::Constant(1, 1, b); };
  p.state_cost = [](const Vec& x) { return x.squaredNorm(); };
  p.control_weight = Vec::Constant(1, R);
  p.lower = Vec::Constant(1, -bound);
  p.upper = Vec::Constant(1, bound);
  p.discount = lambda;
  p.lo = Vec::Constant(1, -2.0);
  p.hi = Vec::Constant(1, 2.0);
  p.nodes = {nodes};
  return p;
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

}  // namespace hjbpi::testing
