#pragma once

#include <span>
#include <vector>

#include "fracnoether/el.hpp"
#include "fracnoether/expr.hpp"
#include "fracnoether/integrate.hpp"

namespace fracnoether {

/// Euler gamma function for x > 0 (Lanczos, g = 7, 9 terms; reflection below 1/2).
double gamma_fn(double x);

struct ActionValue {
  double value = 0.0;
  /// |I_N - I_{N/2}| using every other grid point.
  double quadrature_error_estimate = 0.0;
};

/// (1/Gamma(alpha)) * integral of L(theta,q,v) (t-theta)^(alpha-1) over the trajectory grid,
/// by composite Simpson. The grid must have an even number of intervals.
ActionValue fractional_action(const VariationalProblem& prob, const Trajectory& traj);

/// Composite Simpson over uniformly spaced samples (odd interval counts finish with a 3/8 panel).
double simpson(std::span<const double> samples, double h);

struct StationarityReport {
  double action = 0.0;                 // I(0)
  std::vector<double> eps;
  std::vector<double> delta;           // I(eps) - I(0)
  double exponent = 0.0;               // fitted slope of log|delta| against log eps
  double first_order_coefficient = 0.0;  // (I(eps) - I(-eps)) / (2 eps) at the smallest eps
  double first_order_threshold = 0.0;    // 1e-6 |I(0)| + 1e-9
  bool stationary = false;               // exponent within 2 +- 0.2 and coefficient below threshold
};

/// Perturbs every coordinate of `extremal` by eps*bump(theta) and measures the action response.
/// `bump` must be a function of theta alone that vanishes at a and b.
StationarityReport stationarity_check(const VariationalProblem& prob, const Trajectory& extremal, const Expr& bump,
                                      std::span<const double> eps_ladder);

}  // namespace fracnoether
