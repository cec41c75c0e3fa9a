#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "lagdesc/analyze.hpp"

using namespace lagdesc;

namespace {

ScalarField sampled(const GridSpec& g, const std::function<double(double, double)>& f) {
  ScalarField s(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) s.values[g.index(i, j)] = f(g.x(i), g.y(j));
  }
  return s;
}

// Treat a plain field as a derivative along x and a zero derivative along y.
ManifoldMask scan_x(const ScalarField& f) {
  DerivativeField dx{f, Axis::X, f.grid.hx()};
  DerivativeField dy{sampled(f.grid, [](double, double) { return 1.0; }), Axis::Y, f.grid.hy()};
  return detect_manifolds(dx, dy);
}

std::size_t rows_with_crossing_near_zero(const ManifoldMask& m, double tol) {
  std::vector<bool> hit(m.grid.ny, false);
  for (const auto& c : m.x_crossings) {
    if (std::fabs(c.x) <= tol) hit[c.j] = true;
  }
  return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
}

std::size_t columns_with_crossing_near_zero(const ManifoldMask& m, double tol) {
  std::vector<bool> hit(m.grid.nx, false);
  for (const auto& c : m.y_crossings) {
    if (std::fabs(c.y) <= tol) hit[c.i] = true;
  }
  return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
}

}  // namespace

TEST_CASE("partial_derivative: constants and quadratics") {
  const GridSpec g{-1, 1, -2, 2, 11, 9};
  const auto c = partial_derivative(sampled(g, [](double, double) { return 3.5; }), Axis::X);
  for (double v : c.field.values) CHECK(v == 0.0);
  CHECK(c.axis == Axis::X);
  CHECK(c.spacing == doctest::Approx(0.2));

  const ScalarField q = sampled(g, [](double x, double y) { return x * x + y; });
  const auto dx = partial_derivative(q, Axis::X);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      CHECK(dx.field.at(i, j) == doctest::Approx(2 * g.x(i)).epsilon(1e-12));
    }
    // one-sided at the ends: (f1 - f0) / h
    CHECK(dx.field.at(0, j) == doctest::Approx((g.x(1) * g.x(1) - 1.0) / g.hx()));
  }
  const auto dy = partial_derivative(q, Axis::Y);
  for (double v : dy.field.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("partial_derivative: invalid stencils propagate") {
  const GridSpec g{0, 1, 0, 1, 5, 5};
  ScalarField f = sampled(g, [](double x, double) { return x; });
  f.valid[g.index(2, 2)] = 0;
  const auto dx = partial_derivative(f, Axis::X);
  CHECK_FALSE(dx.field.valid_at(1, 2));
  CHECK_FALSE(dx.field.valid_at(3, 2));
  CHECK(dx.field.valid_at(2, 2));  // central stencil skips the centre node
  CHECK(dx.field.valid_at(1, 1));
  const auto dy = partial_derivative(f, Axis::Y);
  CHECK_FALSE(dy.field.valid_at(2, 1));
  CHECK_FALSE(dy.field.valid_at(2, 3));
  CHECK(dy.field.valid_at(1, 2));

  CHECK_THROWS_AS(partial_derivative(ScalarField(GridSpec{0, 1, 0, 1, 2, 5}), Axis::X),
                  std::invalid_argument);
}

TEST_CASE("detect_manifolds: constant field gives an empty mask") {
  const GridSpec g{-1, 1, -1, 1, 9, 9};
  const ScalarField m = sampled(g, [](double, double) { return 4.0; });
  const auto mask = detect_manifolds(partial_derivative(m, Axis::X), partial_derivative(m, Axis::Y));
  CHECK(mask.x_crossings.empty());
  CHECK(mask.y_crossings.empty());
}

TEST_CASE("detect_manifolds: interpolated crossing inside an edge") {
  const GridSpec g{0, 4, 0, 1, 5, 3};
  // values along x: -1, -1, -1, 3, 3 -> zero at x = 2 + 1/4
  const ScalarField f = sampled(g, [](double x, double) { return x < 2.5 ? -1.0 : 3.0; });
  const auto mask = scan_x(f);
  REQUIRE(mask.x_crossings.size() == 3);
  for (const auto& c : mask.x_crossings) {
    CHECK(c.i == 2);
    CHECK(c.x == doctest::Approx(2.25));
    CHECK(c.jump == 4.0);
  }
  CHECK(mask.y_crossings.empty());
}

TEST_CASE("detect_manifolds: exact zeros count once at the zero") {
  const GridSpec g{-2, 2, 0, 1, 5, 3};
  const ScalarField f = sampled(g, [](double x, double) { return x; });
  const auto mask = scan_x(f);
  REQUIRE(mask.x_crossings.size() == 3);
  for (const auto& c : mask.x_crossings) {
    CHECK(c.i == 2);
    CHECK(c.x == 0.0);
    CHECK(c.jump == 2.0);
  }

  // A run of zeros is reported at its middle; a zero that touches the
  // boundary or does not separate opposite signs is not a crossing.
  const GridSpec w{0, 6, 0, 1, 7, 3};
  const ScalarField run = sampled(w, [](double x, double) {
    if (x < 1.5) return -1.0;
    if (x < 3.5) return 0.0;
    return 1.0;
  });
  const auto m2 = scan_x(run);
  REQUIRE(m2.x_crossings.size() == 3);
  CHECK(m2.x_crossings[0].x == doctest::Approx(2.5));
  CHECK(m2.x_crossings[0].i == 2);

  const ScalarField bounce = sampled(w, [](double x, double) { return std::fabs(x - 3.0); });
  CHECK(scan_x(bounce).x_crossings.empty());
  const ScalarField edge = sampled(w, [](double x, double) { return x; });
  CHECK(scan_x(edge).x_crossings.empty());
}

TEST_CASE("detect_manifolds: invalid nodes break a line") {
  const GridSpec g{-2, 2, 0, 1, 5, 3};
  ScalarField f = sampled(g, [](double x, double) { return x; });
  for (std::size_t j = 0; j < 3; ++j) f.valid[g.index(2, j)] = 0;
  CHECK(scan_x(f).x_crossings.empty());
}

TEST_CASE("detect_manifolds: quantile filter keeps the large jumps") {
  const GridSpec g{-1, 1, 0, 1, 5, 4};
  // Row j has a sign change of size 2*(j+1).
  const ScalarField f = sampled(g, [](double x, double y) { return x * (1.0 + 3.0 * y); });
  CHECK(scan_x(f).x_crossings.size() == 4);

  DerivativeField dx{f, Axis::X, g.hx()};
  DerivativeField dy{sampled(g, [](double, double) { return 1.0; }), Axis::Y, g.hy()};
  const auto filtered = detect_manifolds(dx, dy, 0.5);
  REQUIRE(filtered.x_crossings.size() == 2);
  CHECK(filtered.x_crossings[0].j == 2);
  CHECK(filtered.x_crossings[1].j == 3);

  CHECK_THROWS_AS(detect_manifolds(dx, dy, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(detect_manifolds(dx, dy, -0.1), std::invalid_argument);
}

TEST_CASE("detect_manifolds: grids must match") {
  const ScalarField a(GridSpec{0, 1, 0, 1, 5, 5});
  const ScalarField b(GridSpec{0, 2, 0, 1, 5, 5});
  CHECK_THROWS_AS(detect_manifolds({a, Axis::X, 0.25}, {b, Axis::Y, 0.25}),
                  std::invalid_argument);
}

TEST_CASE("quantile") {
  CHECK(quantile({3, 1, 2}, 0.0) == 1.0);
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2}, 0.25) == 1.25);
}

TEST_CASE("saddles: crossings trace the coordinate axes") {
  const GridSpec g{-1, 1, -1, 1, 41, 41};
  struct Case {
    SaddleParams p;
    double tau;
  };
  for (const auto& c : {Case{{1, 1}, 20}, Case{{1, 2}, 10}, Case{{2, 1}, 10}}) {
    CAPTURE(c.p.lambda);
    CAPTURE(c.p.mu);
    const ScalarField m = compute_field(linear_saddle(c.p), g, 0, c.tau, {});
    const auto dx = partial_derivative(m, Axis::X);
    const auto dy = partial_derivative(m, Axis::Y);
    const auto mask = detect_manifolds(dx, dy);
    CHECK(rows_with_crossing_near_zero(mask, g.hx()) == g.ny);
    CHECK(columns_with_crossing_near_zero(mask, g.hy()) == g.nx);
    for (const auto& x : mask.x_crossings) CHECK(std::fabs(x.x) <= g.hx());
    for (const auto& y : mask.y_crossings) CHECK(std::fabs(y.y) <= g.hy());
  }
}

TEST_CASE("equal-rate saddle: dM/dx0 is antisymmetric in x0") {
  const GridSpec g{-1, 1, -1, 1, 41, 41};
  const ScalarField m = compute_field(linear_saddle({1, 1}), g, 0, 20, {});
  const auto dx = partial_derivative(m, Axis::X);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double a = dx.field.at(i, j);
      const double b = dx.field.at(g.nx - 1 - i, j);
      CHECK(std::fabs(a + b) <= 1e-6 * std::max(std::fabs(a), 1.0));
    }
  }
}

TEST_CASE("detection ignores positive rescaling and mirrors with the field") {
  const GridSpec g{-1, 1, -1, 1, 31, 31};
  const ScalarField m = compute_field(linear_saddle({1, 2}), g, 0, 10, {});
  ScalarField doubled = m;
  for (double& v : doubled.values) v *= 2.0;

  const auto base = detect_manifolds(partial_derivative(m, Axis::X), partial_derivative(m, Axis::Y));
  const auto scaled =
      detect_manifolds(partial_derivative(doubled, Axis::X), partial_derivative(doubled, Axis::Y));
  REQUIRE(base.x_crossings.size() == scaled.x_crossings.size());
  REQUIRE(base.y_crossings.size() == scaled.y_crossings.size());
  for (std::size_t k = 0; k < base.x_crossings.size(); ++k) {
    CHECK(base.x_crossings[k].x == scaled.x_crossings[k].x);
    CHECK(base.x_crossings[k].i == scaled.x_crossings[k].i);
  }

  // Mirror about x0 = 0 using an asymmetric field so the test is not vacuous.
  const ScalarField skew = sampled(g, [](double x, double y) { return (x - 0.37) * (x - 0.37) + y; });
  ScalarField mirrored = skew;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      mirrored.values[g.index(i, j)] = skew.at(g.nx - 1 - i, j);
    }
  }
  const auto a = detect_manifolds(partial_derivative(skew, Axis::X), partial_derivative(skew, Axis::Y));
  const auto b =
      detect_manifolds(partial_derivative(mirrored, Axis::X), partial_derivative(mirrored, Axis::Y));
  REQUIRE(a.x_crossings.size() == g.ny);
  REQUIRE(b.x_crossings.size() == a.x_crossings.size());
  for (std::size_t k = 0; k < a.x_crossings.size(); ++k) {
    CHECK(b.x_crossings[k].x == doctest::Approx(-a.x_crossings[k].x).epsilon(1e-12));
    CHECK(a.x_crossings[k].x == doctest::Approx(0.37).epsilon(0.03));
  }
}

TEST_CASE("separable tanh: dM/dx0 changes sign on the stable manifold") {
  const GridSpec g{-1, 1, -1, 1, 41, 41};
  const ScalarField m = compute_field(separable_incompressible(parse("tanh(x)")), g, 0, 10, {});
  const auto mask = detect_manifolds(partial_derivative(m, Axis::X), partial_derivative(m, Axis::Y));
  CHECK(rows_with_crossing_near_zero(mask, g.hx()) == g.ny);
  CHECK(columns_with_crossing_near_zero(mask, g.hy()) == g.nx);
}
