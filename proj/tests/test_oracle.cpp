#include "hjbpi/oracle.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hjbpi;
using hjbpi::testing::linear_1d;

namespace {

ValueField sampled(Index nodes, double window_scale, const std::function<double(double)>& f) {
  const Grid g = make_grid(Vec::Constant(1, -window_scale), Vec::Constant(1, window_scale), {nodes});
  ValueField v{g, Vec(g.size())};
  for (Index i = 0; i < g.size(); ++i) v.v[i] = f(g.node(i)[0]);
  return v;
}

}  // namespace

TEST_CASE("riccati_1d: examples with back-substitution") {
  const auto r0 = riccati_1d(0.5, 1.0, 0.1, 0.0);
  CHECK(r0.p_star == doctest::Approx((1.0 + std::sqrt(41.0)) / 20.0).epsilon(1e-15));
  CHECK(std::abs(r0.identity_residual()) <= 1e-14);

  const auto r1 = riccati_1d(0.5, 1.0, 0.1, 0.05);
  CHECK(r1.p_star == doctest::Approx(0.367276).epsilon(1e-6));
  CHECK(std::abs(r1.identity_residual()) <= 1e-14);

  const auto r2 = riccati_1d(-1.0, 1.0, 1.0, 0.0);
  CHECK(r2.p_star == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
  CHECK(std::abs(r2.identity_residual()) <= 1e-14);
}

TEST_CASE("riccati_1d: positive root and long double agreement") {
  for (const double a : {-2.0, -0.1, 0.0, 0.5, 3.0}) {
    for (const double lambda : {0.0, 0.05, 1.0}) {
      const auto r = riccati_1d(a, 1.0, 0.1, lambda);
      CHECK(r.p_star > 0.0);
      const auto rl = riccati_1d<long double>(a, 1.0L, 0.1L, lambda);
      CHECK(std::abs(static_cast<long double>(r.p_star) - rl.p_star) <= 1e-15L * rl.p_star);
    }
  }
  CHECK_THROWS_AS(riccati_1d(0.5, 0.0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(riccati_1d(0.5, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("fit_quadratic: exact on quadratics") {
  const QuadraticFit fit = fit_quadratic(sampled(401, 2.0, [](double x) { return 0.37 * x * x; }), 0.25);
  CHECK(fit.p == doctest::Approx(0.37).epsilon(1e-14));
  CHECK(fit.max_rel_dev <= 1e-13);
  CHECK(fit.nodes == 51);
}

TEST_CASE("fit_quadratic: quartic term fades as the window shrinks") {
  const ValueField v = sampled(4001, 2.0, [](double x) { return 0.37 * x * x + x * x * x * x; });
  double prev = std::abs(fit_quadratic(v, 1.0).p - 0.37);
  for (const double w : {0.5, 0.1, 0.02}) {
    const double err = std::abs(fit_quadratic(v, w).p - 0.37);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("fit_quadratic: needs five nodes and a 1D field") {
  const ValueField v = sampled(401, 2.0, [](double x) { return x * x; });
  CHECK_THROWS_AS(fit_quadratic(v, 0.015), std::invalid_argument);
  CHECK_NOTHROW(fit_quadratic(v, 0.025));
  const Grid g2 = make_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {5, 5});
  CHECK_THROWS_AS(fit_quadratic(ValueField{g2, Vec::Zero(25)}, 1.0), std::invalid_argument);
}

TEST_CASE("restrict_field picks coarse nodes") {
  const Grid fine = make_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {9, 5});
  const Grid coarse = make_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {5, 3});
  ValueField f{fine, Vec(fine.size())};
  for (Index i = 0; i < fine.size(); ++i) f.v[i] = fine.node(i)[0] + 10.0 * fine.node(i)[1];
  const ValueField c = restrict_field(f, coarse, 2);
  for (Index i = 0; i < coarse.size(); ++i)
    CHECK(c.v[i] == doctest::Approx(coarse.node(i)[0] + 10.0 * coarse.node(i)[1]).epsilon(1e-15));
  CHECK_THROWS_AS(restrict_field(f, coarse, 0), std::invalid_argument);
}

TEST_CASE("fine_grid_reference: refine 1 is the plain solve") {
  const ProblemSpec p = with_nodes(builtin("test1_det"), {101});
  const Grid g = default_grid(p);
  const GridProblem gp(p, g);
  const Solution s = policy_iteration(gp, proportional_policy(gp), {});
  CHECK(fine_grid_reference(p, g, 1, {}).v == s.value.v);
  CHECK_THROWS_AS(fine_grid_reference(p, g, 3, {}), std::invalid_argument);
}

TEST_CASE("fine_grid_reference: coarse error shrinks under refinement") {
  // Both coarse grids are compared to the same 401-node solve, away from the
  // faces where the constrained value is singular.
  const ProblemSpec p = builtin("test1_det");
  const Grid g101 = default_grid(with_nodes(p, {101}));
  const Grid g201 = default_grid(with_nodes(p, {201}));
  const ValueField ref101 = fine_grid_reference(p, g101, 4, {});
  const ValueField ref201 = fine_grid_reference(p, g201, 2, {});
  auto error = [&p](const Grid& g, const ValueField& ref) {
    const GridProblem gp(p, g);
    const Solution s = policy_iteration(gp, proportional_policy(gp), {});
    double e = 0.0;
    for (Index i = 0; i < g.size(); ++i)
      if (std::abs(g.node(i)[0]) <= 1.5) e = std::max(e, std::abs(s.value.v[i] - ref.v[i]));
    return e;
  };
  CHECK(error(g201, ref201) < error(g101, ref101));
}

TEST_CASE("unconstrained solve approaches the Riccati value under refinement") {
  const double p_star = riccati_1d(0.5, 1.0, 0.1, 0.05).p_star;
  double prev = std::numeric_limits<double>::infinity();
  for (const Index n : {201, 401, 801}) {
    const GridProblem gp(linear_1d(0.5, 1.0, 0.1, 0.05, std::numeric_limits<double>::infinity(), n));
    const Solution s = policy_iteration(gp, proportional_policy(gp), {});
    REQUIRE(s.report.converged);
    const double err = std::abs(fit_quadratic(s.value, 0.25).p - p_star);
    CHECK(err < prev);
    prev = err;
  }
}
