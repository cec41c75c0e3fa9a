#pragma once

#include <string>
#include <variant>

#include "lagdesc/expr.hpp"

namespace lagdesc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Rates of the linear saddle x' = lambda*x, y' = -mu*y.
struct SaddleParams {
  double lambda = 1.0;  // expansion rate
  double mu = 1.0;      // contraction rate
};

/// A planar vector field v(x, y, t). Built-in saddles evaluate in closed
/// form; expression fields run compiled expression programs.
class VectorFieldDef {
 public:
  struct Expressions {
    Expr dx;
    Expr dy;
  };

  const std::string& name() const { return name_; }
  bool autonomous() const { return autonomous_; }

  bool is_saddle() const { return std::holds_alternative<SaddleParams>(components_); }
  const SaddleParams& saddle() const { return std::get<SaddleParams>(components_); }
  bool has_expressions() const { return std::holds_alternative<Expressions>(components_); }
  const Expressions& expressions() const { return std::get<Expressions>(components_); }

  Vec2 operator()(double x, double y, double t) const {
    if (const auto* s = std::get_if<SaddleParams>(&components_)) {
      return {s->lambda * x, -s->mu * y};
    }
    double v[2];
    program_.eval(x, y, t, v);
    return {v[0], v[1]};
  }

  friend VectorFieldDef linear_saddle(const SaddleParams& p);
  friend VectorFieldDef from_expressions(const Expr& dx, const Expr& dy);
  friend VectorFieldDef separable_incompressible(const Expr& f);

 private:
  VectorFieldDef() = default;

  std::string name_;
  std::variant<SaddleParams, Expressions> components_;
  ExprProgram program_;  // outputs (dx, dy)
  bool autonomous_ = true;
};

/// x' = lambda*x, y' = -mu*y. Throws std::invalid_argument unless both rates
/// are positive and finite.
VectorFieldDef linear_saddle(const SaddleParams& p);

/// x' = f(x), y' = -y*f'(x), divergence-free by construction. f may only
/// reference x; throws std::invalid_argument otherwise.
VectorFieldDef separable_incompressible(const Expr& f);

/// General field from two component expressions.
VectorFieldDef from_expressions(const Expr& dx, const Expr& dy);

}  // namespace lagdesc
