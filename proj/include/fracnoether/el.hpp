#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fracnoether/expr.hpp"

namespace fracnoether {

/// Fractional order and observer time of the Riemann-Liouville weight (t - theta)^(alpha - 1).
struct FractionalParams {
  double alpha = 1.0;
  double observer_time = 0.0;

  /// (1 - alpha) / (t - theta): the kernel's logarithmic derivative.
  double kernel_rate(double theta) const noexcept { return (1.0 - alpha) / (observer_time - theta); }
  /// The same rate as an expression of theta; folds to 0 when alpha = 1.
  Expr kernel_rate_expr() const;
};

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

struct BoundaryValues {
  std::vector<double> qa;
  std::vector<double> qb;
};

/// Symbolic partials of L that the Euler-Lagrange machinery reuses.
struct LagrangianDerivatives {
  Expr L;
  Expr dtheta;                          // d1 L
  std::vector<Expr> dq;                 // d2 L, per dof
  std::vector<Expr> momentum;           // d3 L, per dof
  std::vector<Expr> momentum_dtheta;    // d/dtheta of d3 L_i
  std::vector<std::vector<Expr>> momentum_dq;  // [i][j] = d/dq_j of d3 L_i
  std::vector<std::vector<Expr>> hessian;      // [i][j] = d/dv_j of d3 L_i
};

/// Fractional action-like variational problem. Immutable once built; copies share state.
class VariationalProblem {
public:
  /// Validates and assembles; throws ValidationError on any violated invariant
  /// (n >= 1, a < b, 0 < alpha <= 1, t > b, index bounds, boundary sizes).
  static VariationalProblem create(std::size_t n, Expr lagrangian, Interval interval, FractionalParams frac,
                                   std::optional<BoundaryValues> boundary = std::nullopt);

  std::size_t dof() const noexcept { return n_; }
  const Expr& lagrangian() const noexcept { return derivs_->L; }
  const Interval& interval() const noexcept { return interval_; }
  const FractionalParams& frac() const noexcept { return frac_; }
  const std::optional<BoundaryValues>& boundary() const noexcept { return boundary_; }
  const LagrangianDerivatives& derivatives() const noexcept { return *derivs_; }

  /// Same Lagrangian and interval with a different fractional order (used by alpha sweeps).
  VariationalProblem with_alpha(double alpha) const;

private:
  VariationalProblem() = default;

  std::size_t n_ = 0;
  Interval interval_;
  FractionalParams frac_;
  std::optional<BoundaryValues> boundary_;
  std::shared_ptr<const LagrangianDerivatives> derivs_;
};

/// d2 L - d/dtheta d3 L - (1 - alpha)/(t - theta) d3 L, with the total derivative expanded
/// by the chain rule using the supplied acceleration.
std::vector<double> el_residual(const VariationalProblem& prob, const EvalPoint& p, std::span<const double> accel);

/// Explicit form q'' = r(theta, q, v) of the fractional Euler-Lagrange equation.
using OdeRightHandSide = std::function<std::vector<double>(double theta, std::span<const double> q,
                                                           std::span<const double> v)>;

/// Solves the velocity-Hessian system at each call; throws SingularHessianError for
/// degenerate Lagrangians. The returned callable is pure and safe to share across threads.
OdeRightHandSide to_explicit_ode(const VariationalProblem& prob);

/// Dense row-major matrix solve with partial pivoting. Returns nullopt when a pivot falls below
/// `relative_pivot_tol` times the largest matrix entry; `condition_estimate` then receives the
/// ratio of largest to smallest pivot magnitude (infinite for an exact zero).
std::optional<std::vector<double>> solve_linear(std::vector<double> matrix, std::vector<double> rhs,
                                                double relative_pivot_tol = 1e-12,
                                                double* condition_estimate = nullptr);

}  // namespace fracnoether
