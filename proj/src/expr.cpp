#include "lagdesc/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <optional>
#include <system_error>

namespace lagdesc {

namespace {

struct FunctionName {
  std::string_view name;
  UnaryOp op;
};

constexpr std::array<FunctionName, 9> kFunctions{{
    {"sin", UnaryOp::Sin},
    {"cos", UnaryOp::Cos},
    {"tan", UnaryOp::Tan},
    {"tanh", UnaryOp::Tanh},
    {"exp", UnaryOp::Exp},
    {"log", UnaryOp::Log},
    {"sqrt", UnaryOp::Sqrt},
    {"abs", UnaryOp::Abs},
    {"sign", UnaryOp::Sign},
}};

double sign_of(double v) {
  if (std::isnan(v)) return v;
  return static_cast<double>((v > 0.0) - (v < 0.0));
}

double apply(UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Tan: return std::tan(a);
    case UnaryOp::Tanh: return std::tanh(a);
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Log: return std::log(a);
    case UnaryOp::Sqrt: return std::sqrt(a);
    case UnaryOp::Abs: return std::fabs(a);
    case UnaryOp::Sign: return sign_of(a);
  }
  return a;
}

double apply(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr run() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(0, "empty expression", "");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      if (src_[pos_] == ')') {
        throw ParseError(pos_, "unbalanced parenthesis", ")");
      }
      throw ParseError(pos_, "unexpected token", token_at(pos_));
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool at(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  std::string token_at(std::size_t p) const {
    if (p >= src_.size()) return "";
    auto is_word = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    };
    if (!is_word(src_[p])) return std::string(1, src_[p]);
    std::size_t end = p;
    while (end < src_.size() && is_word(src_[end])) ++end;
    return std::string(src_.substr(p, end - p));
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (at('+')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Add, lhs, parse_term());
      } else if (at('-')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (at('*')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (at('/')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (at('-')) {
      ++pos_;
      skip_ws();
      if (pos_ < src_.size() && starts_number(src_[pos_])) {
        const std::size_t save = pos_;
        const double v = lex_number();
        if (!at('^')) return Expr::constant(-v);
        pos_ = save;
      }
      return Expr::unary(UnaryOp::Neg, parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (at('^')) {
      ++pos_;
      return Expr::binary(BinaryOp::Pow, base, parse_unary());
    }
    return base;
  }

  static bool starts_number(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input", "");
    const char c = src_[pos_];
    if (starts_number(c)) return Expr::constant(lex_number());
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      Expr inner = parse_expr();
      if (!at(')')) {
        if (pos_ >= src_.size()) throw ParseError(open, "unbalanced parenthesis", "(");
        throw ParseError(pos_, "expected ')'", token_at(pos_));
      }
      ++pos_;
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view id = src_.substr(start, pos_ - start);
      if (id == "x") return Expr::variable(Variable::X);
      if (id == "y") return Expr::variable(Variable::Y);
      if (id == "t") return Expr::variable(Variable::T);
      for (const auto& f : kFunctions) {
        if (f.name != id) continue;
        if (!at('(')) {
          throw ParseError(start, "expected '(' after function name", std::string(id));
        }
        const std::size_t open = pos_;
        ++pos_;
        Expr arg = parse_expr();
        if (!at(')')) {
          if (pos_ >= src_.size()) throw ParseError(open, "unbalanced parenthesis", "(");
          throw ParseError(pos_, "expected ')'", token_at(pos_));
        }
        ++pos_;
        return Expr::unary(f.op, arg);
      }
      throw ParseError(start, "unknown identifier", std::string(id));
    }
    if (c == ')') throw ParseError(pos_, "unbalanced parenthesis", ")");
    throw ParseError(pos_, "unexpected token", token_at(pos_));
  }

  // number := digits [ "." digits ] [ e [+-] digits ]
  double lex_number() {
    const std::size_t start = pos_;
    auto digit = [&](std::size_t p) {
      return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
    };
    auto malformed = [&]() -> ParseError {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
              ((src_[end] == '+' || src_[end] == '-') && end > start &&
               (src_[end - 1] == 'e' || src_[end - 1] == 'E')))) {
        ++end;
      }
      return ParseError(start, "malformed number", std::string(src_.substr(start, end - start)));
    };

    if (!digit(pos_)) throw malformed();
    while (digit(pos_)) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (!digit(pos_)) throw malformed();
      while (digit(pos_)) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (!digit(pos_)) throw malformed();
      while (digit(pos_)) ++pos_;
    }
    if (pos_ < src_.size() &&
        (src_[pos_] == '.' || std::isalnum(static_cast<unsigned char>(src_[pos_])))) {
      throw malformed();
    }

    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ParseError(start, "number out of range", std::string(src_.substr(start, pos_ - start)));
    }
    return v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Construction helpers used by the differentiator

std::optional<Expr> fold_if_constant(UnaryOp op, const Expr& a) {
  if (!a.is_constant()) return std::nullopt;
  const double v = apply(op, a.value());
  if (!std::isfinite(v)) return std::nullopt;
  return Expr::constant(v);
}

std::optional<Expr> fold_if_constant(BinaryOp op, const Expr& a, const Expr& b) {
  if (!a.is_constant() || !b.is_constant()) return std::nullopt;
  const double v = apply(op, a.value(), b.value());
  if (!std::isfinite(v)) return std::nullopt;
  return Expr::constant(v);
}

Expr make(UnaryOp op, Expr a) {
  if (auto c = fold_if_constant(op, a)) return *c;
  return Expr::unary(op, std::move(a));
}

Expr make(BinaryOp op, Expr a, Expr b) {
  if (auto c = fold_if_constant(op, a, b)) return *c;
  switch (op) {
    case BinaryOp::Add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case BinaryOp::Sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return make(UnaryOp::Neg, b);
      break;
    case BinaryOp::Mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      break;
    case BinaryOp::Div:
      if (b.is_constant(1.0)) return a;
      break;
    case BinaryOp::Pow:
      if (b.is_constant(1.0)) return a;
      break;
  }
  return Expr::binary(op, std::move(a), std::move(b));
}

Expr add(Expr a, Expr b) { return make(BinaryOp::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return make(BinaryOp::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return make(BinaryOp::Mul, std::move(a), std::move(b)); }
Expr div(Expr a, Expr b) { return make(BinaryOp::Div, std::move(a), std::move(b)); }
Expr pow(Expr a, Expr b) { return make(BinaryOp::Pow, std::move(a), std::move(b)); }
Expr call(UnaryOp op, Expr a) { return make(op, std::move(a)); }
Expr num(double v) { return Expr::constant(v); }

// ---------------------------------------------------------------------------
// Printer

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Var:
      return kPrecAtom;
    case NodeKind::Unary:
      return e.unary_op() == UnaryOp::Neg ? kPrecNeg : kPrecAtom;
    case NodeKind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return kPrecAdd;
        case BinaryOp::Mul:
        case BinaryOp::Div: return kPrecMul;
        case BinaryOp::Pow: return kPrecPow;
      }
  }
  return kPrecAtom;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Constant:
      if (std::signbit(e.value())) {
        out += "(-";
        out += format_number(-e.value());
        out += ')';
      } else {
        out += format_number(e.value());
      }
      return;
    case NodeKind::Var:
      out += name_of(e.var());
      return;
    case NodeKind::Unary: {
      const Expr& a = e.child(0);
      if (e.unary_op() == UnaryOp::Neg) {
        out += '-';
        // A bare literal after '-' would reparse as a negative constant.
        const bool literal = a.is_constant() && !std::signbit(a.value());
        if (literal) {
          out += '(';
          print(a, out);
          out += ')';
        } else {
          print_wrapped(a, kPrecNeg, out);
        }
        return;
      }
      out += name_of(e.unary_op());
      out += '(';
      print(a, out);
      out += ')';
      return;
    }
    case NodeKind::Binary: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          print_wrapped(a, kPrecAdd, out);
          out += e.binary_op() == BinaryOp::Add ? " + " : " - ";
          print_wrapped(b, kPrecMul, out);
          return;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          print_wrapped(a, kPrecMul, out);
          out += e.binary_op() == BinaryOp::Mul ? " * " : " / ";
          print_wrapped(b, kPrecNeg, out);
          return;
        case BinaryOp::Pow:
          print_wrapped(a, kPrecAtom, out);
          out += '^';
          print_wrapped(b, kPrecNeg, out);
          return;
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("expression constants must be finite");
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(Variable v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Var;
  n->var = v;
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Unary;
  n->unary = op;
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Binary;
  n->binary = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

bool Expr::references(Variable v) const {
  if (kind() == NodeKind::Var) return var() == v;
  return std::any_of(children().begin(), children().end(),
                     [v](const Expr& c) { return c.references(v); });
}

std::size_t Expr::depth() const {
  std::size_t d = 0;
  for (const auto& c : children()) d = std::max(d, c.depth());
  return d + 1;
}

std::size_t Expr::size() const {
  std::size_t n = 1;
  for (const auto& c : children()) n += c.size();
  return n;
}

ParseError::ParseError(std::size_t offset, std::string message, std::string token)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message +
                         (token.empty() ? std::string() : " '" + token + "'")),
      offset_(offset),
      message_(std::move(message)),
      token_(std::move(token)) {}

std::string_view name_of(UnaryOp op) {
  if (op == UnaryOp::Neg) return "-";
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

std::string_view name_of(Variable v) {
  switch (v) {
    case Variable::X: return "x";
    case Variable::Y: return "y";
    case Variable::T: return "t";
  }
  return "?";
}

Expr parse(std::string_view source) { return Parser(source).run(); }

double eval(const Expr& e, double x, double y, double t) {
  switch (e.kind()) {
    case NodeKind::Constant: return e.value();
    case NodeKind::Var:
      switch (e.var()) {
        case Variable::X: return x;
        case Variable::Y: return y;
        case Variable::T: return t;
      }
      return 0.0;
    case NodeKind::Unary: return apply(e.unary_op(), eval(e.child(0), x, y, t));
    case NodeKind::Binary:
      return apply(e.binary_op(), eval(e.child(0), x, y, t), eval(e.child(1), x, y, t));
  }
  return 0.0;
}

Expr differentiate(const Expr& e, Variable var) {
  switch (e.kind()) {
    case NodeKind::Constant: return num(0.0);
    case NodeKind::Var: return num(e.var() == var ? 1.0 : 0.0);
    case NodeKind::Unary: {
      const Expr& u = e.child(0);
      Expr du = differentiate(u, var);
      if (du.is_constant(0.0)) return num(0.0);
      switch (e.unary_op()) {
        case UnaryOp::Neg: return call(UnaryOp::Neg, du);
        case UnaryOp::Sin: return mul(call(UnaryOp::Cos, u), du);
        case UnaryOp::Cos: return mul(call(UnaryOp::Neg, call(UnaryOp::Sin, u)), du);
        case UnaryOp::Tan: return div(du, pow(call(UnaryOp::Cos, u), num(2.0)));
        case UnaryOp::Tanh:
          return mul(sub(num(1.0), pow(call(UnaryOp::Tanh, u), num(2.0))), du);
        case UnaryOp::Exp: return mul(call(UnaryOp::Exp, u), du);
        case UnaryOp::Log: return div(du, u);
        case UnaryOp::Sqrt: return div(du, mul(num(2.0), call(UnaryOp::Sqrt, u)));
        case UnaryOp::Abs: return mul(call(UnaryOp::Sign, u), du);
        case UnaryOp::Sign: return num(0.0);
      }
      return num(0.0);
    }
    case NodeKind::Binary: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      Expr du = differentiate(u, var);
      Expr dv = differentiate(v, var);
      switch (e.binary_op()) {
        case BinaryOp::Add: return add(du, dv);
        case BinaryOp::Sub: return sub(du, dv);
        case BinaryOp::Mul: return add(mul(du, v), mul(u, dv));
        case BinaryOp::Div:
          if (dv.is_constant(0.0)) return div(du, v);
          return div(sub(mul(du, v), mul(u, dv)), pow(v, num(2.0)));
        case BinaryOp::Pow:
          if (dv.is_constant(0.0)) {
            // d(u^c) = c * u^(c-1) * u'
            return mul(mul(v, pow(u, sub(v, num(1.0)))), du);
          }
          if (du.is_constant(0.0)) {
            // d(c^v) = c^v * log(c) * v'
            return mul(mul(e, call(UnaryOp::Log, u)), dv);
          }
          return mul(e, add(mul(dv, call(UnaryOp::Log, u)), div(mul(v, du), u)));
      }
    }
  }
  return num(0.0);
}

Expr fold_constants(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Var:
      return e;
    case NodeKind::Unary: {
      Expr a = fold_constants(e.child(0));
      if (auto c = fold_if_constant(e.unary_op(), a)) return *c;
      return Expr::unary(e.unary_op(), a);
    }
    case NodeKind::Binary: {
      Expr a = fold_constants(e.child(0));
      Expr b = fold_constants(e.child(1));
      if (auto c = fold_if_constant(e.binary_op(), a, b)) return *c;
      return Expr::binary(e.binary_op(), a, b);
    }
  }
  return e;
}

std::string pretty_print(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Constant: {
      const double va = a.value();
      const double vb = b.value();
      return std::memcmp(&va, &vb, sizeof va) == 0;
    }
    case NodeKind::Var: return a.var() == b.var();
    case NodeKind::Unary:
      return a.unary_op() == b.unary_op() && structurally_equal(a.child(0), b.child(0));
    case NodeKind::Binary:
      return a.binary_op() == b.binary_op() && structurally_equal(a.child(0), b.child(0)) &&
             structurally_equal(a.child(1), b.child(1));
  }
  return false;
}

// ---------------------------------------------------------------------------
// ExprProgram

ExprProgram::ExprProgram(const std::vector<Expr>& outputs) {
  initial_ = {0.0, 0.0, 0.0};
  for (const auto& e : outputs) outputs_.push_back(emit(e));
  memo_.clear();
  memo_.shrink_to_fit();
  constants_.clear();
  constants_.shrink_to_fit();
}

std::uint32_t ExprProgram::emit(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Var:
      return static_cast<std::uint32_t>(e.var());
    case NodeKind::Constant: {
      const double v = e.value();
      for (const std::uint32_t r : constants_) {
        if (std::memcmp(&initial_[r], &v, sizeof v) == 0) return r;
      }
      initial_.push_back(v);
      constants_.push_back(static_cast<std::uint32_t>(initial_.size() - 1));
      return constants_.back();
    }
    case NodeKind::Unary:
    case NodeKind::Binary:
      break;
  }

  std::string key = pretty_print(e);
  for (const auto& [k, r] : memo_) {
    if (k == key) return r;
  }

  Instr in{OpCode::Neg, 0, 0, 0};
  if (e.kind() == NodeKind::Unary) {
    static constexpr std::array<OpCode, 10> kUnary{
        OpCode::Neg, OpCode::Sin, OpCode::Cos, OpCode::Tan, OpCode::Tanh,
        OpCode::Exp, OpCode::Log, OpCode::Sqrt, OpCode::Abs, OpCode::Sign};
    in.op = kUnary[static_cast<std::size_t>(e.unary_op())];
    in.a = emit(e.child(0));
  } else if (e.binary_op() == BinaryOp::Pow && e.child(1).is_constant(2.0)) {
    in.op = OpCode::Square;
    in.a = emit(e.child(0));
  } else {
    static constexpr std::array<OpCode, 5> kBinary{OpCode::Add, OpCode::Sub, OpCode::Mul,
                                                   OpCode::Div, OpCode::Pow};
    in.op = kBinary[static_cast<std::size_t>(e.binary_op())];
    in.a = emit(e.child(0));
    in.b = emit(e.child(1));
  }
  initial_.push_back(0.0);
  in.dst = static_cast<std::uint32_t>(initial_.size() - 1);
  code_.push_back(in);
  memo_.emplace_back(std::move(key), in.dst);
  return in.dst;
}

void ExprProgram::eval(double x, double y, double t, double* out) const {
  if (initial_.size() <= kInlineRegisters) {
    std::array<double, kInlineRegisters> regs;
    std::copy(initial_.begin(), initial_.end(), regs.begin());
    run(regs.data(), x, y, t, out);
    return;
  }
  std::vector<double> regs(initial_);
  run(regs.data(), x, y, t, out);
}

void ExprProgram::run(double* r, double x, double y, double t, double* out) const {
  r[0] = x;
  r[1] = y;
  r[2] = t;
  for (const Instr& in : code_) {
    const double a = r[in.a];
    double v = 0.0;
    switch (in.op) {
      case OpCode::Neg: v = -a; break;
      case OpCode::Sin: v = std::sin(a); break;
      case OpCode::Cos: v = std::cos(a); break;
      case OpCode::Tan: v = std::tan(a); break;
      case OpCode::Tanh: v = std::tanh(a); break;
      case OpCode::Exp: v = std::exp(a); break;
      case OpCode::Log: v = std::log(a); break;
      case OpCode::Sqrt: v = std::sqrt(a); break;
      case OpCode::Abs: v = std::fabs(a); break;
      case OpCode::Sign: v = sign_of(a); break;
      case OpCode::Square: v = a * a; break;
      case OpCode::Add: v = a + r[in.b]; break;
      case OpCode::Sub: v = a - r[in.b]; break;
      case OpCode::Mul: v = a * r[in.b]; break;
      case OpCode::Div: v = a / r[in.b]; break;
      case OpCode::Pow: v = std::pow(a, r[in.b]); break;
    }
    r[in.dst] = v;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = r[outputs_[k]];
}

}  // namespace lagdesc
