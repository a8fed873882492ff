#include "fracnoether/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fracnoether/error.hpp"

namespace fracnoether {

struct Expr::Node {
  Op op;
  double value;
  std::size_t index;
  Expr a;
  Expr b;
};

namespace {

// Integer exponents up to this magnitude are expanded into products.
constexpr double kMaxExpandedPower = 64.0;

const char* op_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Neg: return "negation";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Cos: return "cos";
    case Expr::Op::Exp: return "exp";
    case Expr::Op::Ln: return "ln";
    case Expr::Op::Sqrt: return "sqrt";
    case Expr::Op::Pow: return "power";
    case Expr::Op::Add: return "addition";
    case Expr::Op::Sub: return "subtraction";
    case Expr::Op::Mul: return "multiplication";
    case Expr::Op::Div: return "division";
    default: return "variable";
  }
}

double checked(double x, Expr::Op op) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string("non-finite result in ") + op_name(op));
  }
  return x;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) : node_(std::make_shared<const Node>(Node{Op::Const, value, 0, Expr(nullptr), Expr(nullptr)})) {}

Expr Expr::make(Op op, double value, std::size_t index, Expr a, Expr b) {
  return Expr(std::make_shared<const Node>(Node{op, value, index, std::move(a), std::move(b)}));
}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::variable(Var var) {
  switch (var.kind) {
    case Var::Kind::Theta: return make(Op::Theta, 0.0, 0, Expr(nullptr), Expr(nullptr));
    case Var::Kind::Q: return make(Op::Q, 0.0, var.index, Expr(nullptr), Expr(nullptr));
    case Var::Kind::V: return make(Op::V, 0.0, var.index, Expr(nullptr), Expr(nullptr));
  }
  return Expr();
}

Expr::Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
std::size_t Expr::index() const noexcept { return node_->index; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

bool Expr::depends_on(Var::Kind kind) const {
  switch (op()) {
    case Op::Const: return false;
    case Op::Theta: return kind == Var::Kind::Theta;
    case Op::Q: return kind == Var::Kind::Q;
    case Op::V: return kind == Var::Kind::V;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return lhs().depends_on(kind) || rhs().depends_on(kind);
    default: return lhs().depends_on(kind);
  }
}

bool Expr::depends_on(Var var) const {
  switch (op()) {
    case Op::Const: return false;
    case Op::Theta: return var.kind == Var::Kind::Theta;
    case Op::Q: return var.kind == Var::Kind::Q && var.index == index();
    case Op::V: return var.kind == Var::Kind::V && var.index == index();
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return lhs().depends_on(var) || rhs().depends_on(var);
    default: return lhs().depends_on(var);
  }
}

std::size_t Expr::index_bound(Var::Kind kind) const {
  switch (op()) {
    case Op::Const:
    case Op::Theta: return 0;
    case Op::Q: return kind == Var::Kind::Q ? index() + 1 : 0;
    case Op::V: return kind == Var::Kind::V ? index() + 1 : 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: return std::max(lhs().index_bound(kind), rhs().index_bound(kind));
    default: return lhs().index_bound(kind);
  }
}

std::string Expr::to_string() const {
  switch (op()) {
    case Op::Const: return value() < 0 ? "(" + format_number(value()) + ")" : format_number(value());
    case Op::Theta: return "theta";
    case Op::Q: return "q" + std::to_string(index());
    case Op::V: return "v" + std::to_string(index());
    case Op::Neg: return "(-" + lhs().to_string() + ")";
    case Op::Sin: return "sin(" + lhs().to_string() + ")";
    case Op::Cos: return "cos(" + lhs().to_string() + ")";
    case Op::Exp: return "exp(" + lhs().to_string() + ")";
    case Op::Ln: return "ln(" + lhs().to_string() + ")";
    case Op::Sqrt: return "sqrt(" + lhs().to_string() + ")";
    case Op::Pow: return "(" + lhs().to_string() + ")^(" + format_number(value()) + ")";
    case Op::Add: return "(" + lhs().to_string() + " + " + rhs().to_string() + ")";
    case Op::Sub: return "(" + lhs().to_string() + " - " + rhs().to_string() + ")";
    case Op::Mul: return "(" + lhs().to_string() + " * " + rhs().to_string() + ")";
    case Op::Div: return "(" + lhs().to_string() + " / " + rhs().to_string() + ")";
  }
  return {};
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::make(Expr::Op::Add, 0.0, 0, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::make(Expr::Op::Sub, 0.0, 0, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::make(Expr::Op::Mul, 0.0, 0, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr(a.value() / b.value());
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr::make(Expr::Op::Div, 0.0, 0, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  if (a.op() == Expr::Op::Neg) return a.lhs();
  return Expr::make(Expr::Op::Neg, 0.0, 0, a, Expr(nullptr));
}

Expr sin(const Expr& a) {
  if (a.is_constant()) return Expr(std::sin(a.value()));
  return Expr::make(Expr::Op::Sin, 0.0, 0, a, Expr(nullptr));
}

Expr cos(const Expr& a) {
  if (a.is_constant()) return Expr(std::cos(a.value()));
  return Expr::make(Expr::Op::Cos, 0.0, 0, a, Expr(nullptr));
}

Expr exp(const Expr& a) {
  if (a.is_constant() && std::isfinite(std::exp(a.value()))) return Expr(std::exp(a.value()));
  return Expr::make(Expr::Op::Exp, 0.0, 0, a, Expr(nullptr));
}

Expr log(const Expr& a) {
  if (a.is_constant() && a.value() > 0.0) return Expr(std::log(a.value()));
  return Expr::make(Expr::Op::Ln, 0.0, 0, a, Expr(nullptr));
}

Expr sqrt(const Expr& a) {
  if (a.is_constant() && a.value() >= 0.0) return Expr(std::sqrt(a.value()));
  return Expr::make(Expr::Op::Sqrt, 0.0, 0, a, Expr(nullptr));
}

Expr pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return Expr(1.0);
  if (exponent == 1.0) return base;
  if (std::trunc(exponent) == exponent && std::fabs(exponent) <= kMaxExpandedPower) {
    // square-and-multiply; shared subtrees keep the tree logarithmic in |exponent|
    auto k = static_cast<long>(std::fabs(exponent));
    Expr result(1.0);
    Expr square = base;
    while (k > 0) {
      if (k & 1) result = result * square;
      k >>= 1;
      if (k > 0) square = square * square;
    }
    return exponent < 0 ? Expr(1.0) / result : result;
  }
  if (base.is_constant() && base.value() > 0.0) return Expr(std::pow(base.value(), exponent));
  return Expr::make(Expr::Op::Pow, exponent, 0, base, Expr(nullptr));
}

double eval(const Expr& e, double theta, std::span<const double> q, std::span<const double> v) {
  using Op = Expr::Op;
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Theta: return checked(theta, Op::Theta);
    case Op::Q:
      if (e.index() >= q.size()) throw DomainError("position index out of range");
      return checked(q[e.index()], Op::Q);
    case Op::V:
      if (e.index() >= v.size()) throw DomainError("velocity index out of range");
      return checked(v[e.index()], Op::V);
    case Op::Neg: return -eval(e.lhs(), theta, q, v);
    case Op::Sin: return checked(std::sin(eval(e.lhs(), theta, q, v)), Op::Sin);
    case Op::Cos: return checked(std::cos(eval(e.lhs(), theta, q, v)), Op::Cos);
    case Op::Exp: return checked(std::exp(eval(e.lhs(), theta, q, v)), Op::Exp);
    case Op::Ln: {
      const double x = eval(e.lhs(), theta, q, v);
      if (x <= 0.0) throw DomainError("ln of non-positive argument " + format_number(x));
      return std::log(x);
    }
    case Op::Sqrt: {
      const double x = eval(e.lhs(), theta, q, v);
      if (x < 0.0) throw DomainError("sqrt of negative argument " + format_number(x));
      return std::sqrt(x);
    }
    case Op::Pow: {
      const double x = eval(e.lhs(), theta, q, v);
      if (x <= 0.0) throw DomainError("real power of non-positive base " + format_number(x));
      return checked(std::pow(x, e.value()), Op::Pow);
    }
    case Op::Add: return checked(eval(e.lhs(), theta, q, v) + eval(e.rhs(), theta, q, v), Op::Add);
    case Op::Sub: return checked(eval(e.lhs(), theta, q, v) - eval(e.rhs(), theta, q, v), Op::Sub);
    case Op::Mul: return checked(eval(e.lhs(), theta, q, v) * eval(e.rhs(), theta, q, v), Op::Mul);
    case Op::Div: {
      const double num = eval(e.lhs(), theta, q, v);
      const double den = eval(e.rhs(), theta, q, v);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den, Op::Div);
    }
  }
  return 0.0;
}

double eval(const Expr& e, const EvalPoint& p) { return eval(e, p.theta, p.q, p.v); }

Expr diff(const Expr& e, Var var) {
  using Op = Expr::Op;
  if (!e.depends_on(var)) return Expr(0.0);
  switch (e.op()) {
    case Op::Const: return Expr(0.0);
    case Op::Theta:
    case Op::Q:
    case Op::V: return Expr(1.0);  // depends_on already matched kind and index
    case Op::Neg: return -diff(e.lhs(), var);
    case Op::Sin: return cos(e.lhs()) * diff(e.lhs(), var);
    case Op::Cos: return -(sin(e.lhs()) * diff(e.lhs(), var));
    case Op::Exp: return e * diff(e.lhs(), var);
    case Op::Ln: return diff(e.lhs(), var) / e.lhs();
    case Op::Sqrt: return diff(e.lhs(), var) / (Expr(2.0) * e);
    case Op::Pow: return Expr(e.value()) * pow(e.lhs(), e.value() - 1.0) * diff(e.lhs(), var);
    case Op::Add: return diff(e.lhs(), var) + diff(e.rhs(), var);
    case Op::Sub: return diff(e.lhs(), var) - diff(e.rhs(), var);
    case Op::Mul: return diff(e.lhs(), var) * e.rhs() + e.lhs() * diff(e.rhs(), var);
    case Op::Div: {
      const Expr& num = e.lhs();
      const Expr& den = e.rhs();
      if (!den.depends_on(var)) return diff(num, var) / den;
      return (diff(num, var) * den - num * diff(den, var)) / (den * den);
    }
  }
  return Expr(0.0);
}

// ---------------------------------------------------------------------------
// Parser: recursive descent.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'

namespace {

class Parser {
public:
  Parser(std::string_view src, std::size_t n, const std::map<std::string, double>& constants)
      : src_(src), n_(n), constants_(constants) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    Expr exponent = unary();
    if (exponent.is_constant()) return pow(base, exponent.value());
    // variable exponent: rewrite through exp/ln, which keeps the positive-base restriction
    return exp(exponent * log(base));
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (is_alpha(c)) return name();
    fail(std::string("unexpected character '") + c + "'");
  }

  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  Expr number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto [end, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
    if (ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(end - src_.data());
    if (pos_ < src_.size() && is_alpha(src_[pos_])) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr(value);
  }

  Expr name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
    const std::string id(src_.substr(start, pos_ - start));

    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      Expr arg = expr();
      expect(')');
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      if (id == "exp") return exp(arg);
      if (id == "ln" || id == "log") return log(arg);
      if (id == "sqrt") return sqrt(arg);
      pos_ = start;
      fail("unknown function '" + id + "'");
    }

    if (id == "theta") return Expr::variable(Var::theta());
    if (id == "pi") return Expr(std::numbers::pi);
    if (auto it = constants_.find(id); it != constants_.end()) return Expr(it->second);
    if ((id[0] == 'q' || id[0] == 'v') && id.size() > 1 &&
        id.find_first_not_of("0123456789", 1) == std::string::npos) {
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), index);
      if (ec != std::errc() || index >= n_) {
        pos_ = start;
        fail("variable index out of range: " + id + " (degrees of freedom: " + std::to_string(n_) + ")");
      }
      return Expr::variable(id[0] == 'q' ? Var::q(index) : Var::v(index));
    }
    pos_ = start;
    fail("unknown identifier '" + id + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t n_;
  const std::map<std::string, double>& constants_;
};

}  // namespace

Expr parse(std::string_view source, std::size_t n, const std::map<std::string, double>& constants) {
  return Parser(source, n, constants).run();
}

}  // namespace fracnoether
