#include "fracnoether/el.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracnoether/error.hpp"

namespace fracnoether {

Expr FractionalParams::kernel_rate_expr() const {
  if (alpha == 1.0) return Expr(0.0);
  return Expr(1.0 - alpha) / (Expr(observer_time) - Expr::variable(Var::theta()));
}

namespace {

void validate_frac(const FractionalParams& frac, const Interval& iv) {
  if (!(frac.alpha > 0.0 && frac.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in (0,1], got " + std::to_string(frac.alpha));
  }
  if (!std::isfinite(frac.observer_time) || !(frac.observer_time > iv.b)) {
    throw ValidationError("observer time must exceed b (t=" + std::to_string(frac.observer_time) +
                          ", b=" + std::to_string(iv.b) + ")");
  }
}

double require_before_observer(const VariationalProblem& prob, double theta) {
  if (!(theta < prob.frac().observer_time)) {
    throw DomainError("theta=" + std::to_string(theta) + " is not before the observer time");
  }
  return prob.frac().kernel_rate(theta);
}

}  // namespace

VariationalProblem VariationalProblem::create(std::size_t n, Expr lagrangian, Interval interval,
                                              FractionalParams frac, std::optional<BoundaryValues> boundary) {
  if (n == 0) throw ValidationError("degrees of freedom must be positive");
  if (!std::isfinite(interval.a) || !std::isfinite(interval.b) || !(interval.a < interval.b)) {
    throw ValidationError("interval must satisfy a < b");
  }
  validate_frac(frac, interval);
  if (lagrangian.index_bound(Var::Kind::Q) > n || lagrangian.index_bound(Var::Kind::V) > n) {
    throw ValidationError("Lagrangian references a variable index beyond the degrees of freedom");
  }
  if (boundary) {
    if (boundary->qa.size() != n || boundary->qb.size() != n) {
      throw ValidationError("boundary vectors must have length " + std::to_string(n));
    }
  }

  auto d = std::make_shared<LagrangianDerivatives>();
  d->L = lagrangian;
  d->dtheta = diff(lagrangian, Var::theta());
  d->dq.resize(n);
  d->momentum.resize(n);
  d->momentum_dtheta.resize(n);
  d->momentum_dq.assign(n, std::vector<Expr>(n));
  d->hessian.assign(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    d->dq[i] = diff(lagrangian, Var::q(i));
    d->momentum[i] = diff(lagrangian, Var::v(i));
    d->momentum_dtheta[i] = diff(d->momentum[i], Var::theta());
    for (std::size_t j = 0; j < n; ++j) {
      d->momentum_dq[i][j] = diff(d->momentum[i], Var::q(j));
      d->hessian[i][j] = diff(d->momentum[i], Var::v(j));
    }
  }

  VariationalProblem prob;
  prob.n_ = n;
  prob.interval_ = interval;
  prob.frac_ = frac;
  prob.boundary_ = std::move(boundary);
  prob.derivs_ = std::move(d);
  return prob;
}

VariationalProblem VariationalProblem::with_alpha(double alpha) const {
  VariationalProblem copy = *this;
  copy.frac_.alpha = alpha;
  validate_frac(copy.frac_, copy.interval_);
  return copy;
}

std::vector<double> el_residual(const VariationalProblem& prob, const EvalPoint& p, std::span<const double> accel) {
  const std::size_t n = prob.dof();
  if (p.q.size() != n || p.v.size() != n || accel.size() != n) {
    throw ValidationError("evaluation point dimension does not match the problem");
  }
  const double rate = require_before_observer(prob, p.theta);
  const auto& d = prob.derivatives();

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dmomentum = eval(d.momentum_dtheta[i], p);
    for (std::size_t j = 0; j < n; ++j) {
      dmomentum += eval(d.momentum_dq[i][j], p) * p.v[j];
      dmomentum += eval(d.hessian[i][j], p) * accel[j];
    }
    residual[i] = eval(d.dq[i], p) - dmomentum - rate * eval(d.momentum[i], p);
  }
  return residual;
}

std::optional<std::vector<double>> solve_linear(std::vector<double> m, std::vector<double> rhs,
                                                double relative_pivot_tol, double* condition_estimate) {
  const std::size_t n = rhs.size();
  double scale = 0.0;
  for (double x : m) scale = std::max(scale, std::fabs(x));

  double max_pivot = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  auto report = [&](double cond) {
    if (condition_estimate) *condition_estimate = cond;
  };

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot_row = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(m[r * n + col]) > std::fabs(m[pivot_row * n + col])) pivot_row = r;
    }
    const double pivot = std::fabs(m[pivot_row * n + col]);
    max_pivot = std::max(max_pivot, pivot);
    min_pivot = std::min(min_pivot, pivot);
    if (scale == 0.0 || pivot < relative_pivot_tol * scale) {
      report(pivot == 0.0 ? std::numeric_limits<double>::infinity() : max_pivot / pivot);
      return std::nullopt;
    }
    if (pivot_row != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[col * n + c], m[pivot_row * n + c]);
      std::swap(rhs[col], rhs[pivot_row]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = m[r * n + col] / m[col * n + col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= factor * m[col * n + c];
      rhs[r] -= factor * rhs[col];
    }
  }

  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= m[i * n + c] * x[c];
    x[i] = acc / m[i * n + i];
  }
  report(n == 0 ? 1.0 : max_pivot / min_pivot);
  return x;
}

OdeRightHandSide to_explicit_ode(const VariationalProblem& prob) {
  return [prob](double theta, std::span<const double> q, std::span<const double> v) {
    const std::size_t n = prob.dof();
    const double rate = require_before_observer(prob, theta);
    const auto& d = prob.derivatives();

    std::vector<double> hessian(n * n);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      double force = eval(d.dq[i], theta, q, v) - eval(d.momentum_dtheta[i], theta, q, v) -
                     rate * eval(d.momentum[i], theta, q, v);
      for (std::size_t j = 0; j < n; ++j) {
        force -= eval(d.momentum_dq[i][j], theta, q, v) * v[j];
        hessian[i * n + j] = eval(d.hessian[i][j], theta, q, v);
      }
      rhs[i] = force;
    }

    double cond = 0.0;
    auto accel = solve_linear(std::move(hessian), std::move(rhs), 1e-12, &cond);
    if (!accel) throw SingularHessianError(theta, cond);
    return *accel;
  };
}

}  // namespace fracnoether
