#pragma once

// Arithmetic expressions over the variables x, y, t.
//
// Grammar (whitespace is insignificant):
//
//   expr    := term { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := "-" unary | power
//   power   := primary [ "^" unary ]
//   primary := number | "x" | "y" | "t" | func "(" expr ")" | "(" expr ")"
//   func    := "sin" | "cos" | "tan" | "tanh" | "exp" | "log" | "sqrt"
//            | "abs" | "sign"
//   number  := digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//
// "^" binds tighter than unary minus ("-x^2" is -(x^2)) and is right
// associative ("x^2^3" is x^(2^3)). A minus sign written directly in front
// of a numeric literal that is not itself raised to a power produces a
// negative constant, so "-2" is the constant -2 while "-(2)" is neg(2).

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lagdesc {

enum class Variable { X, Y, T };

enum class UnaryOp { Neg, Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Sign };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

enum class NodeKind { Constant, Var, Unary, Binary };

class Expr;

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  Variable var = Variable::X;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::vector<Expr> children;
};

/// Immutable expression tree. Copies share structure, so an Expr is cheap to
/// pass by value and safe to evaluate concurrently.
class Expr {
 public:
  static Expr constant(double value);
  static Expr variable(Variable v);
  static Expr unary(UnaryOp op, Expr arg);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  NodeKind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  Variable var() const { return node_->var; }
  UnaryOp unary_op() const { return node_->unary; }
  BinaryOp binary_op() const { return node_->binary; }
  const std::vector<Expr>& children() const { return node_->children; }
  const Expr& child(std::size_t i) const { return node_->children.at(i); }

  bool is_constant() const { return kind() == NodeKind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  bool references(Variable v) const;
  std::size_t depth() const;
  std::size_t size() const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string message, std::string token);

  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }
  const std::string& token() const { return token_; }

 private:
  std::size_t offset_;
  std::string message_;
  std::string token_;
};

/// Throws ParseError on malformed input.
Expr parse(std::string_view source);

/// Plain recursive evaluation. Domain violations (1/0, log(-1), ...) produce
/// non-finite results rather than errors.
double eval(const Expr& e, double x, double y, double t);

/// Symbolic derivative. Literal subexpressions are constant folded and a few
/// identities (0*a, 1*a, a+0, a-0) are applied; nothing else is simplified.
///
/// abs'(u) is emitted as sign(u)*u', and sign(0) = 0, so the derivative of
/// abs evaluates to 0 at the kink.
Expr differentiate(const Expr& e, Variable var);

/// Replaces every subexpression whose operands are all constants by its
/// value, provided the value is finite.
Expr fold_constants(const Expr& e);

/// Text that parses back to a structurally identical tree.
std::string pretty_print(const Expr& e);

/// Exact structural comparison; constants compare bitwise (so 0 != -0).
bool structurally_equal(const Expr& a, const Expr& b);

std::string_view name_of(UnaryOp op);
std::string_view name_of(Variable v);

/// Several expressions compiled together into one straight-line register
/// program for the integration hot loop. Structurally identical subtrees are
/// evaluated once, so tanh(x) shared by both components of a field costs a
/// single call. eval() performs no heap allocation for small programs.
class ExprProgram {
 public:
  ExprProgram() = default;
  explicit ExprProgram(const std::vector<Expr>& outputs);

  std::size_t outputs() const { return outputs_.size(); }
  std::size_t instructions() const { return code_.size(); }

  /// Writes one value per compiled expression into `out`.
  void eval(double x, double y, double t, double* out) const;

 private:
  enum class OpCode : unsigned char {
    Neg, Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Sign, Square,
    Add, Sub, Mul, Div, Pow,
  };
  struct Instr {
    OpCode op;
    std::uint32_t dst, a, b;
  };

  std::uint32_t emit(const Expr& e);
  void run(double* regs, double x, double y, double t, double* out) const;

  static constexpr std::size_t kInlineRegisters = 128;

  // Registers 0..2 hold x, y, t; constants and temporaries follow.
  std::vector<double> initial_;
  std::vector<Instr> code_;
  std::vector<std::uint32_t> outputs_;
  // Compile-time only: subtree text and constant registers already emitted.
  std::vector<std::pair<std::string, std::uint32_t>> memo_;
  std::vector<std::uint32_t> constants_;
};

}  // namespace lagdesc
