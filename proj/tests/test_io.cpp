#include "hjbpi/io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace hjbpi;
using hjbpi::testing::vec;

TEST_CASE("format_double: shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const double x = d(rng);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("value csv round trip") {
  const GridProblem gp(with_nodes(builtin("test3_det"), {5, 4, 3}));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  ValueField v{gp.grid(), Vec(gp.size())};
  PolicyField u{gp.grid(), Mat(2, gp.size())};
  for (Index i = 0; i < gp.size(); ++i) {
    v.v[i] = d(rng);
    u.u(0, i) = d(rng);
    u.u(1, i) = d(rng);
  }
  const std::string text = value_csv(v, u);
  CHECK(text.rfind("x1,x2,x3,V,u1,u2\n", 0) == 0);
  const StoredSolution back = parse_value_csv(text, gp.grid(), 2);
  CHECK(back.value.v == v.v);
  CHECK(back.policy.u == u.u);
  CHECK(value_csv(back.value, back.policy) == text);
}

TEST_CASE("value csv rejects malformed input") {
  const GridProblem gp(with_nodes(builtin("test1_det"), {5}));
  const ValueField v{gp.grid(), Vec::Zero(5)};
  const PolicyField u{gp.grid(), Mat::Zero(1, 5)};
  const std::string good = value_csv(v, u);
  CHECK_NOTHROW(parse_value_csv(good, gp.grid(), 1));
  CHECK_THROWS_AS(parse_value_csv("a,b,c\n", gp.grid(), 1), std::runtime_error);
  CHECK_THROWS_AS(parse_value_csv(good, gp.grid(), 2), std::runtime_error);
  std::string truncated = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
  CHECK_THROWS_AS(parse_value_csv(truncated, gp.grid(), 1), std::runtime_error);
  std::string garbled = good;
  garbled.replace(garbled.find("\n-2,0,0") + 1, 2, "zz");
  CHECK_THROWS_AS(parse_value_csv(garbled, gp.grid(), 1), std::runtime_error);
  const Grid other = make_grid(vec({-1}), vec({1}), {5});
  CHECK_THROWS_AS(parse_value_csv(good, other, 1), std::runtime_error);
}

TEST_CASE("trajectory and residual csv layout") {
  Trajectory t;
  t.times = {0.0, 0.5};
  t.states = Mat(1, 2);
  t.states << 1, 0.75;
  t.controls = Mat(1, 2);
  t.controls << -1, -1;
  t.running_cost = vec({1.1, 0.6625});
  t.accumulated_cost = vec({0, 0.440625});
  CHECK(trajectory_csv(t) ==
        "t,x1,u1,running_cost,accumulated_cost\n0,1,-1,1.1,0\n0.5,0.75,-1,0.6625,0.440625\n");

  const Grid g = make_grid(vec({-1}), vec({1}), {3});
  Residual r{vec({std::nan(""), 0.25, std::nan("")}), 0.25, 0.25};
  CHECK(residual_csv(g, r) == "x1,residual\n-1,nan\n0,0.25\n1,nan\n");
  CHECK(residual_norms_json(r).dump() == R"({"sup":0.25,"l2":0.25})");
}

TEST_CASE("report json carries the record fields in order") {
  SolveReport rep;
  rep.converged = true;
  rep.iterations.push_back({0, 1.5, 2.0, 0.5, 0.0, 3});
  const auto j = report_json(rep);
  CHECK(j.dump() ==
        R"({"converged":true,"iterations":[{"iter":0,"policy_change":1.5,"residual_sup":2.0,"residual_l2":0.5,"value_drop":0.0,"inner_steps":3}]})");
}

TEST_CASE("custom problem from json") {
  const auto j = nlohmann::json::parse(R"({
    "name": "lin", "dim": 1, "control_dim": 1, "params": {"a": 0.5},
    "drift": ["a*x1"], "input": [["1"]], "state_cost": "x1^2",
    "R": [0.1], "alpha": [-1], "beta": ["inf"], "lambda": 0.05,
    "lo": [-2], "hi": [2], "n": [401]})");
  const ProblemSpec p = parse_problem(j);
  const ProblemSpec ref = builtin("test1_det");
  CHECK(p.name == "lin");
  CHECK(p.drift(vec({1.3}))[0] == ref.drift(vec({1.3}))[0]);
  CHECK(p.input(vec({1.3})) == ref.input(vec({1.3})));
  CHECK(p.state_cost(vec({1.3})) == ref.state_cost(vec({1.3})));
  CHECK(p.lower[0] == -1.0);
  CHECK(std::isinf(p.upper[0]));
  CHECK_FALSE(p.stochastic());

  auto bad = j;
  bad["drift"] = {"a*x1 + 1"};
  CHECK_THROWS_AS(parse_problem(bad), std::invalid_argument);
  bad = j;
  bad["n"] = {401, 3};
  CHECK_THROWS_AS(parse_problem(bad), std::runtime_error);
  bad = j;
  bad["beta"] = {"huge"};
  CHECK_THROWS_AS(parse_problem(bad), std::runtime_error);
  bad = j;
  bad.erase("state_cost");
  CHECK_THROWS(parse_problem(bad));
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), std::runtime_error);
}

TEST_CASE("write_file creates parent directories") {
  const auto dir = std::filesystem::temp_directory_path() / "hjbpi_io_test";
  std::filesystem::remove_all(dir);
  write_file(dir / "a" / "b.txt", "hello\n");
  CHECK(read_file(dir / "a" / "b.txt") == "hello\n");
  std::filesystem::remove_all(dir);
}
