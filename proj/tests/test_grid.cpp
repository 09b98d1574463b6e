#include "hjbpi/grid.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace hjbpi;
using hjbpi::testing::vec;

TEST_CASE("grid: 401 nodes on (-2, 2)") {
  const Grid g = make_grid(vec({-2}), vec({2}), {401});
  CHECK(g.size() == 401);
  CHECK(g.spacing(0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(g.node(200)[0] == 0.0);
  CHECK(g.node(0)[0] == -2.0);
  CHECK(g.node(400)[0] == 2.0);
  CHECK(g.origin() == 200);
}

TEST_CASE("grid: three nodes on [0, 1]") {
  const Grid g = make_grid(vec({0}), vec({1}), {3});
  CHECK(g.node(0)[0] == 0.0);
  CHECK(g.node(1)[0] == 0.5);
  CHECK(g.node(2)[0] == 1.0);
}

TEST_CASE("grid: 41^3 cube") {
  const Grid g = make_grid(vec({-2, -2, -2}), vec({2, 2, 2}), {41, 41, 41});
  CHECK(g.size() == 68921);
  for (int k = 0; k < 3; ++k) CHECK(g.spacing(k) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.node(g.size() - 1) == vec({2, 2, 2}));
  CHECK(g.node(0) == vec({-2, -2, -2}));
}

TEST_CASE("grid: row-major order, last dimension fastest") {
  const Grid g = make_grid(vec({0, 0}), vec({1, 2}), {3, 5});
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 5);
  MultiIndex mi(2);
  mi << 1, 3;
  CHECK(g.flat(mi) == 8);
  CHECK(g.node(8) == vec({0.5, 1.5}));
}

TEST_CASE("grid: flat and multi indices are inverse") {
  for (const auto& counts : {std::vector<Index>{7}, std::vector<Index>{4, 9}, std::vector<Index>{3, 5, 4}}) {
    const int d = static_cast<int>(counts.size());
    const Grid g(Vec::Constant(d, -1.0), Vec::Constant(d, 1.0), counts);
    for (Index j = 0; j < g.size(); ++j) CHECK(g.flat(g.multi(j)) == j);
  }
}

TEST_CASE("grid: neighbour spacing within four rounding units") {
  const Grid g = make_grid(vec({-2, -0.3, 1}), vec({2, 0.7, 5}), {11, 13, 9});
  for (Index j = 0; j < g.size(); ++j) {
    if (g.on_boundary(j)) continue;
    for (int k = 0; k < 3; ++k) {
      const double step = g.node(j + g.stride(k))[k] - g.node(j)[k];
      CHECK(std::abs(step - g.spacing(k)) <= 4 * std::numeric_limits<double>::epsilon() * 5.0);
    }
  }
}

TEST_CASE("grid: classify") {
  const Grid line = make_grid(vec({-2}), vec({2}), {401});
  MultiIndex i(1);
  i << 1;
  CHECK(classify(i, line).interior);
  i << 0;
  const NodeClass c = classify(i, line);
  CHECK_FALSE(c.interior);
  REQUIRE(c.faces.size() == 1);
  CHECK(c.faces[0] == Face{0, Side::Low});

  const Grid cube = make_grid(vec({-2, -2, -2}), vec({2, 2, 2}), {41, 41, 41});
  MultiIndex j(3);
  j << 0, 40, 5;
  const NodeClass cc = classify(j, cube);
  CHECK_FALSE(cc.interior);
  REQUIRE(cc.faces.size() == 2);
  CHECK(cc.faces[0] == Face{0, Side::Low});
  CHECK(cc.faces[1] == Face{1, Side::High});

  j << 0, 41, 5;
  CHECK_THROWS_AS(classify(j, cube), std::out_of_range);
}

TEST_CASE("grid: invalid construction") {
  CHECK_THROWS_AS(make_grid(vec({0}), vec({1, 2}), {3}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(vec({0}), vec({1}), {2}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(vec({1}), vec({1}), {5}), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(vec({0, 0, 0, 0}), vec({1, 1, 1, 1}), {3, 3, 3, 3}),
                  std::invalid_argument);
}

TEST_CASE("grid: origin absent when no node sits at zero") {
  const Grid g = make_grid(vec({-1}), vec({1}), {4});
  CHECK(g.origin() == -1);
}
