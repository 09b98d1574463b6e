#include "hjbpi/control.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace hjbpi;
using hjbpi::testing::inf;
using hjbpi::testing::vec;

namespace {

const Vec kLo2 = Vec::Constant(2, -1.0);
const Vec kHi2 = Vec::Constant(2, 1.0);

Vec random_vec(std::mt19937_64& rng, Index n, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST_CASE("project_box: examples") {
  CHECK(project_box(vec({0.5}), vec({-1}), vec({1}))[0] == 0.5);
  CHECK(project_box(vec({3, -0.2}), kLo2, kHi2) == vec({1, -0.2}));
  const Vec once = project_box(vec({-7, 0.9}), kLo2, kHi2);
  CHECK(once == vec({-1, 0.9}));
  CHECK(project_box(once, kLo2, kHi2) == once);
}

TEST_CASE("project_box: idempotent, non-expansive, variational inequality") {
  std::mt19937_64 rng(7);
  const Vec R = vec({0.1, 2.0});
  for (int t = 0; t < 2000; ++t) {
    const Vec z1 = random_vec(rng, 2, 5.0), z2 = random_vec(rng, 2, 5.0);
    const Vec p1 = project_box(z1, kLo2, kHi2), p2 = project_box(z2, kLo2, kHi2);
    CHECK(project_box(p1, kLo2, kHi2) == p1);
    CHECK((p1 - p2).norm() <= (z1 - z2).norm() + 1e-15);
    // (z - P z, u - P z)_R <= 0 for every u in the box.
    const Vec u = random_vec(rng, 2, 1.0);
    CHECK((z1 - p1).dot(R.cwiseProduct(u - p1)) <= 1e-12);
  }
}

TEST_CASE("project_box: enlarging the box never moves the projection further") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    const Vec z = random_vec(rng, 2, 5.0);
    const Vec small = project_box(z, kLo2, kHi2);
    const Vec big = project_box(z, 2.0 * kLo2, 2.0 * kHi2);
    CHECK((z - big).norm() <= (z - small).norm());
  }
}

TEST_CASE("control_law: examples") {
  const Mat g = Mat::Ones(1, 1);
  const Vec R = vec({0.1}), lo = vec({-1}), hi = vec({1});
  CHECK(control_law(g, vec({0.2}), R, lo, hi)[0] == doctest::Approx(-1.0));
  CHECK(control_law(g, vec({0.0}), R, lo, hi)[0] == 0.0);
  CHECK(control_law(g, vec({1.0}), R, lo, hi)[0] == -1.0);
  CHECK(control_law(g, vec({1.0}), R, vec({-inf()}), vec({inf()}))[0] == -5.0);
}

TEST_CASE("control_law: minimizes the control Hamiltonian over the box") {
  const Mat g = Mat::Ones(1, 1);
  const Vec R = vec({0.1}), lo = vec({-1}), hi = vec({1});
  std::mt19937_64 rng(3);
  for (double grad : {1.0, 0.2, -0.05, 0.0, -3.0}) {
    const Vec p = vec({grad});
    const Vec us = control_law(g, p, R, lo, hi);
    // Variational inequality (R^{-1} g^T p + 2 u*, u - u*)_R >= 0.
    for (int s = 0; s < 100; ++s) {
      const Vec u = random_vec(rng, 1, 1.0);
      const double vi = ((g.transpose() * p).cwiseQuotient(R) + 2.0 * us).dot(R.cwiseProduct(u - us));
      CHECK(vi >= -1e-10);
      CHECK(p.dot(g * us) + us.dot(R.cwiseProduct(us)) <=
            p.dot(g * u) + u.dot(R.cwiseProduct(u)) + 1e-14);
    }
  }
}

TEST_CASE("policy_update: bounds and unconstrained law") {
  const GridProblem con(builtin("test1_det"));
  const GridProblem unc(unconstrained(builtin("test1_det")));
  Mat grad(1, con.size());
  for (Index i = 0; i < con.size(); ++i) grad(0, i) = 3.0 * con.grid().node(i)[0];
  const PolicyField uc = policy_update(con, grad);
  const PolicyField uu = policy_update(unc, grad);
  CHECK(within_bounds(uc, con.problem()));
  CHECK(uc.u.cwiseAbs().maxCoeff() == 1.0);
  for (Index i = 0; i < unc.size(); ++i) CHECK(uu.u(0, i) == -0.5 * grad(0, i) / 0.1);
  CHECK(uc.u(0, con.grid().origin()) == 0.0);
  grad(0, 7) = std::nan("");
  CHECK_THROWS_AS(policy_update(con, grad), std::domain_error);
}

TEST_CASE("policy helpers") {
  const GridProblem gp(builtin("test3_det"));
  const PolicyField u0 = proportional_policy(gp);
  CHECK(within_bounds(u0, gp.problem()));
  CHECK(u0.u.rows() == 2);
  const PolicyField z = zero_policy(gp);
  CHECK(z.u.isZero());
  CHECK(policy_distance(u0, u0) == 0.0);
  CHECK(policy_distance(z, u0) == 1.0);
}
