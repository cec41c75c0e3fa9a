#pragma once

// Test-only helpers: random expression trees and finite-difference oracles.

#include <cmath>
#include <random>

#include "lagdesc/expr.hpp"
#include "lagdesc/fields.hpp"

namespace lagdesc::testing {

inline Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 99);
  if (depth <= 1 || pick(rng) < 20) {
    const int leaf = pick(rng) % 4;
    if (leaf < 3) return Expr::variable(static_cast<Variable>(leaf));
    switch (pick(rng) % 4) {
      case 0: return Expr::constant(static_cast<double>(pick(rng) % 10));
      case 1: return Expr::constant(-static_cast<double>(pick(rng) % 10));
      case 2: return Expr::constant(std::uniform_real_distribution<double>(-1e3, 1e3)(rng));
      default: return Expr::constant(std::ldexp(std::uniform_real_distribution<double>(0.5, 1)(rng),
                                                 std::uniform_int_distribution<int>(-40, 40)(rng)));
    }
  }
  if (pick(rng) < 40) {
    const auto op = static_cast<UnaryOp>(pick(rng) % 10);
    return Expr::unary(op, random_expr(rng, depth - 1));
  }
  const auto op = static_cast<BinaryOp>(pick(rng) % 5);
  return Expr::binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
}

/// Central difference of `e` along `var` at (x, y, t).
inline double central_difference(const Expr& e, Variable var, double x, double y, double t,
                                 double h = 1e-6) {
  auto at = [&](double d) {
    switch (var) {
      case Variable::X: return eval(e, x + d, y, t);
      case Variable::Y: return eval(e, x, y + d, t);
      case Variable::T: return eval(e, x, y, t + d);
    }
    return 0.0;
  };
  return (at(h) - at(-h)) / (2.0 * h);
}

/// Mixed relative error: |a - b| / max(1, |b|).
inline double mixed_error(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

inline double relative_error(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

/// Divergence of a planar field by central differences.
inline double divergence(const VectorFieldDef& f, double x, double y, double t, double h = 1e-6) {
  const double dudx = (f(x + h, y, t).x - f(x - h, y, t).x) / (2.0 * h);
  const double dvdy = (f(x, y + h, t).y - f(x, y - h, t).y) / (2.0 * h);
  return dudx + dvdy;
}

}  // namespace lagdesc::testing
