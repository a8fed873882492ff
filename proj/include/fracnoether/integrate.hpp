#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracnoether/el.hpp"
#include "fracnoether/expr.hpp"

namespace fracnoether {

/// Uniformly sampled solution of the explicit ODE plus running integrals ("channels")
/// accumulated from a. All arrays have length steps() + 1.
struct Trajectory {
  std::vector<double> theta;
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> v;
  std::map<std::string, std::vector<double>> channels;

  std::size_t steps() const noexcept { return theta.empty() ? 0 : theta.size() - 1; }
  std::size_t dof() const noexcept { return q.empty() ? 0 : q.front().size(); }
  EvalPoint point(std::size_t k) const { return {theta[k], q[k], v[k]}; }
  const std::vector<double>& channel(const std::string& name) const;
};

/// Named integrands of (theta, q, v) accumulated alongside the solve.
using Integrands = std::map<std::string, Expr>;

/// Classical RK4 on (q, v)' = (v, rhs). Integrands are advanced as extra ODE components
/// using the same stage states, so channels inherit the solver's order.
Trajectory ivp_solve(const OdeRightHandSide& rhs, Interval interval, std::span<const double> q0,
                     std::span<const double> v0, std::size_t steps, const Integrands& integrands = {});

struct ShootingOptions {
  double tol = 1e-9;
  std::size_t max_iter = 50;
};

struct ShootingReport {
  bool converged = false;
  std::size_t iterations = 0;  // Newton updates applied
  std::vector<double> boundary_miss;  // q(b) - q_b
  std::vector<double> initial_velocity;
};

struct ShootingResult {
  Trajectory trajectory;
  ShootingReport report;
};

/// Newton shooting on v0 -> q(b; v0) - q_b with a forward-difference Jacobian.
/// Non-convergence is reported (converged = false), not thrown.
ShootingResult bvp_shoot(const VariationalProblem& prob, std::size_t steps, const ShootingOptions& options = {},
                         const Integrands& integrands = {});

/// Closed-form (q, v) at theta.
using ExactSolution = std::function<std::pair<std::vector<double>, std::vector<double>>(double theta)>;

struct ConvergenceResult {
  std::vector<std::size_t> steps;
  std::vector<double> max_errors;
  /// Least-squares slope of log(error) against log(h); empty when errors sit at rounding level.
  std::optional<double> order;
};

/// Integrates the IVP seeded from exact(a) for each step count and fits the error decay.
ConvergenceResult convergence_order(const VariationalProblem& prob, const ExactSolution& exact,
                                    std::span<const std::size_t> step_counts);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

/// `theta,q0..,v0..,<channels>` with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// 17-significant-digit rendering used by every CSV writer.
std::string format_double(double x);

}  // namespace fracnoether
