#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fracnoether {

/// A variable slot of a Lagrangian-like function: intrinsic time, position q_i or velocity v_i.
struct Var {
  enum class Kind : std::uint8_t { Theta, Q, V };

  Kind kind = Kind::Theta;
  std::size_t index = 0;

  static constexpr Var theta() noexcept { return {Kind::Theta, 0}; }
  static constexpr Var q(std::size_t i) noexcept { return {Kind::Q, i}; }
  static constexpr Var v(std::size_t i) noexcept { return {Kind::V, i}; }

  friend constexpr bool operator==(Var, Var) noexcept = default;
};

/// Argument triple (theta, q, v) at which expressions are evaluated.
struct EvalPoint {
  double theta = 0.0;
  std::vector<double> q;
  std::vector<double> v;
};

/// Immutable expression tree over (theta, q, v). Copies share nodes.
///
/// Construction folds constants and drops neutral elements (x+0, 1*x, ...) but performs no
/// further simplification. Integer powers are expanded into products so that negative bases
/// stay on the real line; `Pow` nodes only ever carry non-integer exponents and require a
/// positive base at evaluation time.
class Expr {
public:
  enum class Op : std::uint8_t { Const, Theta, Q, V, Neg, Sin, Cos, Exp, Ln, Sqrt, Pow, Add, Sub, Mul, Div };

  Expr();  // the constant 0
  Expr(double value);  // NOLINT(google-explicit-constructor): literals read naturally in formulas

  static Expr constant(double value);
  static Expr variable(Var var);

  Op op() const noexcept;
  /// Constant value for `Const`, exponent for `Pow`.
  double value() const noexcept;
  /// Variable index for `Q` / `V`.
  std::size_t index() const noexcept;
  /// Operand of unary nodes, left operand of binary nodes.
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

  bool depends_on(Var::Kind kind) const;
  bool depends_on(Var var) const;
  /// One past the largest index of the given kind, 0 if absent.
  std::size_t index_bound(Var::Kind kind) const;

  /// Fully parenthesised text accepted back by `parse`.
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  struct Node;

private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(Op op, double value, std::size_t index, Expr a, Expr b);

  friend Expr sin(const Expr&);
  friend Expr cos(const Expr&);
  friend Expr exp(const Expr&);
  friend Expr log(const Expr&);
  friend Expr sqrt(const Expr&);
  friend Expr pow(const Expr&, double);

  std::shared_ptr<const Node> node_;
};

Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr pow(const Expr& base, double exponent);

/// Evaluates `e`; throws DomainError instead of returning a non-finite value.
double eval(const Expr& e, double theta, std::span<const double> q, std::span<const double> v);
double eval(const Expr& e, const EvalPoint& p);

/// Exact symbolic partial derivative.
Expr diff(const Expr& e, Var var);

/// Parses infix text over `theta`, `q0..q{n-1}`, `v0..v{n-1}`, numeric literals, `pi`,
/// `+ - * / ^`, and `sin cos exp ln log sqrt`. `constants` binds extra names to numbers.
Expr parse(std::string_view source, std::size_t n, const std::map<std::string, double>& constants = {});

}  // namespace fracnoether
