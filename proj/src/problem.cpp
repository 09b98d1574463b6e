#include "hjbpi/problem.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace hjbpi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec constant(int n, double v) { return Vec::Constant(n, v); }

ProblemSpec scalar_problem(std::string name, std::function<double(double)> f) {
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = 1;
  p.control_dim = 1;
  p.drift = [f = std::move(f)](const Vec& x) { return Vec::Constant(1, f(x[0])); };
  p.input = [](const Vec&) { return Mat::Ones(1, 1); };
  p.state_cost = [](const Vec& x) { return x.squaredNorm(); };
  p.control_weight = constant(1, 0.1);
  p.lower = constant(1, -1.0);
  p.upper = constant(1, 1.0);
  p.lo = constant(1, -2.0);
  p.hi = constant(1, 2.0);
  p.nodes = {401};
  return p;
}

ProblemSpec linearized_lorenz(std::string name) {
  constexpr double sigma = 10.0, rho = 1.1, beta = 8.0 / 3.0;
  ProblemSpec p;
  p.name = std::move(name);
  p.dim = 3;
  p.control_dim = 2;
  p.drift = [](const Vec& x) {
    Vec dx(3);
    dx << sigma * (x[1] - x[0]), x[0] * rho - x[1], -beta * x[2];
    return dx;
  };
  p.input = [](const Vec&) {
    Mat g = Mat::Zero(3, 2);
    g(1, 0) = 1.0;
    g(2, 1) = 1.0;
    return g;
  };
  p.state_cost = [](const Vec& x) { return x.squaredNorm(); };
  p.control_weight = constant(2, 0.01);
  p.lower = constant(2, -1.0);
  p.upper = constant(2, 1.0);
  p.discount = 0.05;
  p.lo = constant(3, -2.0);
  p.hi = constant(3, 2.0);
  p.nodes = {41, 41, 41};
  return p;
}

}  // namespace

bool ProblemSpec::constrained() const {
  return lower.array().isFinite().any() || upper.array().isFinite().any();
}

ProblemSpec builtin(Builtin id) {
  switch (id) {
    case Builtin::Test1Det: {
      auto p = scalar_problem("test1_det", [](double x) { return 0.5 * x; });
      p.discount = 0.05;
      return p;
    }
    case Builtin::Test1Stoch: {
      auto p = scalar_problem("test1_stoch", [](double x) { return 0.5 * x; });
      p.discount = 0.05;
      p.noise_dim = 1;
      p.noise = [](const Vec&) { return Mat::Constant(1, 1, 0.005); };
      p.additive_noise = true;
      return p;
    }
    case Builtin::Test2: {
      auto p = scalar_problem("test2", [](double x) { return x - x * x * x; });
      p.discount = 0.0;
      return p;
    }
    case Builtin::Test3Det:
      return linearized_lorenz("test3_det");
    case Builtin::Test3Stoch: {
      auto p = linearized_lorenz("test3_stoch");
      p.noise_dim = 2;
      p.noise = [](const Vec&) {
        Mat g1 = Mat::Zero(3, 2);
        g1(1, 0) = 0.05;
        g1(2, 1) = 0.05;
        return g1;
      };
      p.additive_noise = true;
      return p;
    }
    case Builtin::Test4: {
      constexpr double sigma = 10.0, rho = 2.0, beta = 8.0 / 3.0;
      ProblemSpec p;
      p.name = "test4";
      p.dim = 3;
      p.control_dim = 1;
      p.drift = [](const Vec& x) {
        Vec dx(3);
        dx << sigma * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1], x[0] * x[1] - beta * x[2];
        return dx;
      };
      p.input = [](const Vec&) {
        Mat g = Mat::Zero(3, 1);
        g(1, 0) = 1.0;
        return g;
      };
      p.state_cost = [](const Vec& x) { return x.squaredNorm(); };
      p.control_weight = constant(1, 0.01);
      p.lower = constant(1, -1.0);
      p.upper = constant(1, 1.0);
      p.discount = 0.05;
      p.lo = constant(3, -2.0);
      p.hi = constant(3, 2.0);
      p.nodes = {41, 41, 41};
      return p;
    }
  }
  throw std::invalid_argument("unknown builtin");
}

std::vector<std::string> builtin_names() {
  return {"test1_det", "test1_stoch", "test2", "test3_det", "test3_stoch", "test4"};
}

ProblemSpec builtin(std::string_view name) {
  if (name == "test1_det") return builtin(Builtin::Test1Det);
  if (name == "test1_stoch") return builtin(Builtin::Test1Stoch);
  if (name == "test2") return builtin(Builtin::Test2);
  if (name == "test3_det") return builtin(Builtin::Test3Det);
  if (name == "test3_stoch") return builtin(Builtin::Test3Stoch);
  if (name == "test4") return builtin(Builtin::Test4);
  throw std::invalid_argument("unknown problem: " + std::string(name));
}

Grid default_grid(const ProblemSpec& p) { return make_grid(p.lo, p.hi, p.nodes); }

Vec eval_dynamics(const ProblemSpec& p, const Vec& x, const Vec& u) {
  constexpr double tol = 1e-12;
  if ((u.array() < p.lower.array() - tol).any() || (u.array() > p.upper.array() + tol).any())
    throw std::domain_error("eval_dynamics: control outside the admissible box");
  return p.drift(x) + p.input(x) * u;
}

double running_cost(const ProblemSpec& p, const Vec& x, const Vec& u) {
  return p.state_cost(x) + u.dot(p.control_weight.cwiseProduct(u));
}

void validate(const ProblemSpec& p) {
  const int d = p.dim, m = p.control_dim;
  if (d < 1 || d > 3) throw std::invalid_argument("problem: dimension must be 1, 2 or 3");
  if (m < 1) throw std::invalid_argument("problem: need at least one control");
  if (!p.drift || !p.input || !p.state_cost)
    throw std::invalid_argument("problem: drift, input map and state cost are required");
  if (p.control_weight.size() != m || p.lower.size() != m || p.upper.size() != m)
    throw std::invalid_argument("problem: R and bounds must have control dimension");
  if (p.lo.size() != d || p.hi.size() != d || static_cast<int>(p.nodes.size()) != d)
    throw std::invalid_argument("problem: domain must have state dimension");
  if (!(p.control_weight.array() > 0.0).all())
    throw std::invalid_argument("problem: R must be diagonal with positive entries");
  if ((p.lower.array() > 0.0).any() || (p.upper.array() < 0.0).any())
    throw std::invalid_argument("problem: bounds must satisfy lower <= 0 <= upper");
  if (!(p.discount >= 0.0)) throw std::invalid_argument("problem: discount must be >= 0");

  const Vec zero = Vec::Zero(d);
  const Vec f0 = p.drift(zero);
  if (f0.size() != d) throw std::invalid_argument("problem: drift has wrong dimension");
  const Mat g0 = p.input(zero);
  if (g0.rows() != d || g0.cols() != m)
    throw std::invalid_argument("problem: input map has wrong shape");
  if (f0.cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("problem: f(0) != 0");
  if (std::abs(p.state_cost(zero)) > 1e-12) throw std::invalid_argument("problem: l(0) != 0");
  if (p.stochastic()) {
    const Mat n0 = p.noise(zero);
    if (n0.rows() != d || n0.cols() != p.noise_dim)
      throw std::invalid_argument("problem: noise map has wrong shape");
    if (!p.additive_noise && n0.cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("problem: g1(0) != 0");
  }

  std::mt19937_64 rng(0x5eed);
  for (int s = 0; s < 64; ++s) {
    Vec x(d);
    for (int k = 0; k < d; ++k)
      x[k] = std::uniform_real_distribution<double>(p.lo[k], p.hi[k])(rng);
    if (x.norm() < 1e-9) continue;
    if (!(p.state_cost(x) > 0.0))
      throw std::invalid_argument("problem: state cost must be positive away from the origin");
  }
}

ProblemSpec unconstrained(ProblemSpec p) {
  p.lower = Vec::Constant(p.control_dim, -kInf);
  p.upper = Vec::Constant(p.control_dim, kInf);
  return p;
}

ProblemSpec with_discount(ProblemSpec p, double lambda) {
  p.discount = lambda;
  return p;
}

ProblemSpec with_nodes(ProblemSpec p, const std::vector<Index>& nodes) {
  p.nodes = nodes;
  return p;
}

ProblemSpec with_zero_noise(ProblemSpec p) {
  const int d = p.dim;
  const int k = p.noise_dim > 0 ? p.noise_dim : 1;
  p.noise_dim = k;
  p.noise = [d, k](const Vec&) { return Mat::Zero(d, k); };
  p.additive_noise = false;
  return p;
}

std::vector<Vec> lorenz_equilibria(double sigma, double rho, double beta) {
  (void)sigma;  // equilibria do not depend on sigma
  std::vector<Vec> eq{Vec::Zero(3)};
  if (rho > 1.0) {
    const double c = std::sqrt(beta * (rho - 1.0));
    Vec plus(3), minus(3);
    plus << c, c, rho - 1.0;
    minus << -c, -c, rho - 1.0;
    eq.push_back(plus);
    eq.push_back(minus);
  }
  return eq;
}

}  // namespace hjbpi
