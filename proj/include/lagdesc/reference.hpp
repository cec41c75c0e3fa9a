#pragma once

#include <stdexcept>

#include "lagdesc/fields.hpp"

namespace lagdesc {

/// Closed-form flow of the linear saddle:
///   x(t) = x0 e^{lambda t},  y(t) = y0 e^{-mu t}.
struct AnalyticSaddleFlow {
  double lambda = 1.0;
  double mu = 1.0;

  Vec2 position(Vec2 x0, double t) const;
  double speed(Vec2 x0, double t) const;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive Simpson quadrature of `speed` over [-tau, tau]. The absolute
/// error target is quad_tol * (1 + |M|); recursion stops at depth 60 and
/// throws QuadratureError if any panel is still unresolved there.
///
/// Independent of the ODE integrator on purpose: it is the yardstick the
/// integrator is checked against.
double oracle_M(const AnalyticSaddleFlow& flow, Vec2 x0, double tau, double quad_tol = 1e-12);

}  // namespace lagdesc
