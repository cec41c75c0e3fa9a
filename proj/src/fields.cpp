#include "lagdesc/fields.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace lagdesc {

namespace {

std::string format_rate(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

VectorFieldDef linear_saddle(const SaddleParams& p) {
  if (!(p.lambda > 0.0) || !(p.mu > 0.0) || !std::isfinite(p.lambda) || !std::isfinite(p.mu)) {
    throw std::invalid_argument("saddle rates must be positive and finite");
  }
  VectorFieldDef f;
  f.name_ = "saddle(" + format_rate(p.lambda) + "," + format_rate(p.mu) + ")";
  f.components_ = p;
  f.autonomous_ = true;
  return f;
}

VectorFieldDef from_expressions(const Expr& dx, const Expr& dy) {
  VectorFieldDef f;
  f.name_ = "custom(" + pretty_print(dx) + "; " + pretty_print(dy) + ")";
  f.components_ = VectorFieldDef::Expressions{dx, dy};
  f.program_ = ExprProgram({dx, dy});
  f.autonomous_ = !dx.references(Variable::T) && !dy.references(Variable::T);
  return f;
}

VectorFieldDef separable_incompressible(const Expr& f) {
  if (f.references(Variable::Y) || f.references(Variable::T)) {
    throw std::invalid_argument("separable field: f must depend on x only");
  }
  const Expr df = differentiate(f, Variable::X);
  // y' = -y * f'(x)
  const Expr dy = Expr::binary(BinaryOp::Mul, Expr::unary(UnaryOp::Neg, Expr::variable(Variable::Y)),
                               df);
  VectorFieldDef field = from_expressions(f, dy);
  field.name_ = "separable(" + pretty_print(f) + ")";
  return field;
}

}  // namespace lagdesc
