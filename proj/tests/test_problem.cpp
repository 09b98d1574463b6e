#include "hjbpi/expression.hpp"
#include "hjbpi/problem.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace hjbpi;
using hjbpi::testing::vec;

TEST_CASE("problem: eval_dynamics") {
  CHECK(eval_dynamics(builtin("test1_det"), vec({1}), vec({-1}))[0] == -0.5);
  CHECK(eval_dynamics(builtin("test2"), vec({1}), vec({0}))[0] == 0.0);
  CHECK_THROWS_AS(eval_dynamics(builtin("test1_det"), vec({1}), vec({1.1})), std::domain_error);
  CHECK_NOTHROW(eval_dynamics(builtin("test1_det"), vec({1}), vec({1.0 + 1e-13})));
}

TEST_CASE("problem: running cost") {
  CHECK(running_cost(builtin("test1_det"), vec({2}), vec({1})) == doctest::Approx(4.1));
  CHECK(running_cost(builtin("test1_det"), vec({0}), vec({0})) == 0.0);
  CHECK(running_cost(builtin("test3_det"), vec({1, 1, 1}), vec({1, 1})) ==
        doctest::Approx(3.02));
}

TEST_CASE("problem: builtin drifts") {
  const Vec f4 = eval_dynamics(builtin("test4"), vec({1, 1, 1}), vec({0}));
  CHECK(f4[0] == 0.0);
  CHECK(f4[1] == 0.0);
  CHECK(f4[2] == doctest::Approx(-5.0 / 3.0));
  const Vec f3 = eval_dynamics(builtin("test3_det"), vec({1, 1, 1}), vec({0, 0}));
  CHECK(f3[0] == 0.0);
  CHECK(f3[1] == doctest::Approx(0.1));
  CHECK(f3[2] == doctest::Approx(-8.0 / 3.0));
  const ProblemSpec t1 = builtin("test1_det");
  CHECK(t1.lower[0] == -1.0);
  CHECK(t1.upper[0] == 1.0);
}

TEST_CASE("problem: every builtin has an equilibrium at the origin") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const ProblemSpec p = builtin(name);
    const Vec zero = Vec::Zero(p.dim);
    CHECK(eval_dynamics(p, zero, Vec::Zero(p.control_dim)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(running_cost(p, zero, Vec::Zero(p.control_dim)) == 0.0);
    CHECK_NOTHROW(validate(p));
  }
}

TEST_CASE("problem: builtins are pure") {
  for (const auto& name : builtin_names()) {
    const ProblemSpec a = builtin(name), b = builtin(name);
    CHECK(a.dim == b.dim);
    CHECK(a.control_weight == b.control_weight);
    CHECK(a.lower == b.lower);
    CHECK(a.discount == b.discount);
    const Vec x = Vec::Constant(a.dim, 0.3);
    CHECK(a.drift(x) == b.drift(x));
    CHECK(a.input(x) == b.input(x));
  }
}

TEST_CASE("problem: unknown name") { CHECK_THROWS_AS(builtin("test9"), std::invalid_argument); }

TEST_CASE("problem: stochastic variants") {
  const ProblemSpec s1 = builtin("test1_stoch");
  CHECK(s1.stochastic());
  CHECK(s1.noise(vec({0.7}))(0, 0) == 0.005);
  const ProblemSpec s3 = builtin("test3_stoch");
  const Mat g1 = s3.noise(vec({0.1, 0.2, 0.3}));
  CHECK(g1.rows() == 3);
  CHECK(g1.cols() == 2);
  CHECK(g1(1, 0) == 0.05);
  CHECK(g1(2, 1) == 0.05);
  CHECK(g1.cwiseAbs().sum() == doctest::Approx(0.1));
  CHECK_FALSE(builtin("test3_det").stochastic());
}

TEST_CASE("problem: lorenz equilibria") {
  const auto eq = lorenz_equilibria(10.0, 2.0, 8.0 / 3.0);
  REQUIRE(eq.size() == 3);
  CHECK(eq[1][0] == doctest::Approx(1.632993161855452).epsilon(1e-15));
  CHECK(eq[1][2] == 1.0);
  const ProblemSpec p = builtin("test4");
  for (const Vec& c : eq) CHECK(p.drift(c).norm() <= 1e-12);
  CHECK(lorenz_equilibria(10.0, 0.5, 8.0 / 3.0).size() == 1);
}

TEST_CASE("problem: validation rejects bad problems") {
  ProblemSpec p = builtin("test1_det");
  p.control_weight[0] = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = builtin("test1_det");
  p.lower[0] = 0.5;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = builtin("test1_det");
  p.drift = [](const Vec& x) { return Vec::Constant(1, x[0] + 1.0); };
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = builtin("test1_det");
  p.state_cost = [](const Vec& x) { return x[0]; };
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = builtin("test3_stoch");
  p.additive_noise = false;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("problem: unconstrained and zero-noise variants") {
  const ProblemSpec u = unconstrained(builtin("test1_det"));
  CHECK_FALSE(u.constrained());
  CHECK(std::isinf(u.upper[0]));
  const ProblemSpec z = with_zero_noise(builtin("test1_det"));
  CHECK(z.stochastic());
  CHECK(z.noise(vec({1.0})).isZero());
}

TEST_CASE("expression: arithmetic and parameters") {
  const auto e = Expression::compile("a*x1 - x1^3 + 2*(x2 - 1)/4", 2, {{"a", 0.5}});
  CHECK(e(vec({2, 3})) == doctest::Approx(0.5 * 2 - 8 + 1));
  CHECK(Expression::compile("-x1^2", 1, {})(vec({3})) == -9.0);
  CHECK(Expression::compile("x1*(rho - x3) - x2", 3, {{"rho", 2}})(vec({1, 1, 1})) == 0.0);
  CHECK(Expression::compile("1.5e-1", 1, {})(vec({0})) == 0.15);
}

TEST_CASE("expression: errors") {
  CHECK_THROWS_AS(Expression::compile("x1 +", 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(Expression::compile("x2", 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(Expression::compile("b*x1", 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(Expression::compile("(x1", 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(Expression::compile("x1^0.5", 1, {}), std::invalid_argument);
}
