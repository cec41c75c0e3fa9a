#include <doctest.h>

#include <cmath>
#include <cstring>

#include "lagdesc/ldfield.hpp"
#include "lagdesc/reference.hpp"
#include "support.hpp"

using namespace lagdesc;
using lagdesc::testing::relative_error;

namespace {

GridSpec square(std::size_t n) { return {-1, 1, -1, 1, n, n}; }

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("GridSpec layout") {
  const GridSpec g{-2, 2, 0, 1, 5, 3};
  CHECK(g.hx() == 1.0);
  CHECK(g.hy() == 0.5);
  CHECK(g.x(0) == -2.0);
  CHECK(g.x(4) == 2.0);
  CHECK(g.y(1) == 0.5);
  CHECK(g.index(2, 1) == 7);
  CHECK(g.size() == 15);

  // Symmetric bounds give exactly mirrored nodes and an exact zero.
  const GridSpec s = square(201);
  for (std::size_t i = 0; i < 201; ++i) CHECK(s.x(i) == -s.x(200 - i));
  CHECK(s.x(100) == 0.0);
}

TEST_CASE("GridSpec validation") {
  CHECK_THROWS_AS((GridSpec{1, 1, 0, 1, 3, 3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{0, 1, 2, 1, 3, 3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{0, 1, 0, 1, 1, 3}.validate()), std::invalid_argument);
  CHECK_NOTHROW((GridSpec{0, 1, 0, 1, 2, 2}.validate()));
}

TEST_CASE("zero field gives an all-zero, all-valid M") {
  const auto f = from_expressions(parse("0"), parse("0"));
  const ScalarField m = compute_field(f, square(9), 0, 5, {});
  CHECK(m.values.size() == 81);
  CHECK(m.valid_count() == 81);
  for (double v : m.values) CHECK(v == 0.0);
  CHECK(m.meta.field_name == f.name());
  CHECK(m.meta.tau == 5.0);
  CHECK(m.meta.config_hash == config_hash({}));
}

TEST_CASE("equal-rate saddle: M is symmetric under axis reflections") {
  const GridSpec g = square(41);
  const ScalarField m = compute_field(linear_saddle({1, 1}), g, 0, 20, {});
  CHECK(m.valid_count() == g.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = m.at(i, j);
      const double vx = m.at(g.nx - 1 - i, j);
      const double vy = m.at(i, g.ny - 1 - j);
      CHECK(std::fabs(v - vx) <= 1e-9 * std::max(1.0, std::fabs(v)));
      CHECK(std::fabs(v - vy) <= 1e-9 * std::max(1.0, std::fabs(v)));
    }
  }
}

TEST_CASE("unequal-rate saddle: every node matches the quadrature oracle") {
  const GridSpec g = square(21);
  const ScalarField m = compute_field(linear_saddle({1, 2}), g, 0, 10, {});
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double exact = oracle_M({1, 2}, {g.x(i), g.y(j)}, 10);
      CAPTURE(i);
      CAPTURE(j);
      REQUIRE(m.valid_at(i, j));
      if (exact == 0.0) {
        CHECK(m.at(i, j) == 0.0);
      } else {
        CHECK(relative_error(m.at(i, j), exact) <= 1e-6);
      }
    }
  }
}

TEST_CASE("output does not depend on the worker count") {
  const auto f = separable_incompressible(parse("tanh(x)"));
  const GridSpec g = square(15);
  const ScalarField one = compute_field(f, g, 0, 4, {}, {1});
  for (unsigned workers : {2u, 3u, 8u, 32u}) {
    const ScalarField many = compute_field(f, g, 0, 4, {}, {workers});
    CHECK(bitwise_equal(one.values, many.values));
    CHECK(one.valid == many.valid);
  }
}

TEST_CASE("M grows with tau") {
  const auto f = separable_incompressible(parse("sin(x)"));
  const GridSpec g = square(11);
  const ScalarField short_window = compute_field(f, g, 0, 2, {});
  const ScalarField long_window = compute_field(f, g, 0, 3, {});
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(long_window.values[k] >= short_window.values[k]);
  }
}

TEST_CASE("escaping trajectories are flagged per node") {
  // e^{2*20} overflows the escape radius everywhere except on x0 = 0.
  const GridSpec g = square(11);
  const ScalarField m = compute_field(linear_saddle({2, 1}), g, 0, 20, {});
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      CHECK(m.valid_at(i, j) == (i == 5));
    }
  }
}

TEST_CASE("compute_field validates its inputs") {
  const auto f = linear_saddle({1, 1});
  CHECK_THROWS_AS(compute_field(f, GridSpec{0, 1, 0, 1, 1, 5}, 0, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(compute_field(f, square(5), 0, -1, {}), std::invalid_argument);
  IntegratorConfig bad;
  bad.rtol = 0;
  CHECK_THROWS_AS(compute_field(f, square(5), 0, 1, bad), std::invalid_argument);
}
