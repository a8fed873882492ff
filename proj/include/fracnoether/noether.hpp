#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracnoether/el.hpp"
#include "fracnoether/expr.hpp"
#include "fracnoether/integrate.hpp"

namespace fracnoether {

/// Infinitesimal generator theta -> theta + eps*tau(theta,q), q -> q + eps*xi(theta,q),
/// optionally paired with the gauge rate dLambda/dtheta(theta,q,v).
struct SymmetryGenerator {
  Expr tau;
  std::vector<Expr> xi;
  std::optional<Expr> gauge_rate;

  /// Rejects tau or xi that depend on velocities.
  static SymmetryGenerator create(Expr tau, std::vector<Expr> xi, std::optional<Expr> gauge_rate = std::nullopt);

  SymmetryGenerator with_gauge_rate(Expr rate) const;
};

/// Sampled candidate constant of motion with its drift statistics.
struct ChargeSeries {
  std::string label;
  std::vector<double> theta;
  std::vector<double> values;
  double drift = 0.0;
  double relative_drift = 0.0;
};

struct Drift {
  double absolute = 0.0;
  double relative = 0.0;
};

/// max_k |c_k - c_0| and that value over 1 + max_k |c_k|.
Drift drift(std::span<const double> values);
Drift drift(const ChargeSeries& series);

/// de/dtheta along a motion: d_theta e + (d_q e).v + (d_v e).accel. `accel` may be empty
/// only when e does not depend on velocities.
double total_derivative(const Expr& e, const EvalPoint& p, std::span<const double> accel = {});

/// Symbolic d_theta e + sum_i (d_qi e) v_i for e = e(theta, q).
Expr rate_along_motion(const Expr& e, std::size_t n);

/// LHS - RHS of the necessary and sufficient quasi-invariance condition (with the kernel term
/// L*(1-alpha)/(t-theta)*tau). Requires gen.gauge_rate.
double quasi_invariance_residual(const VariationalProblem& prob, const SymmetryGenerator& gen, const EvalPoint& p);

/// L*tau + d3L.(xi - v*tau): the factor the kernel rate multiplies in the full condition once the
/// reduced one holds. Diagnostic only; charges never require it to vanish.
double kernel_term_residual(const VariationalProblem& prob, const SymmetryGenerator& gen, const EvalPoint& p);

/// Gauge rate that turns the reduced Noether-Bessel-Hagen condition into an identity:
/// d1L tau + d2L.xi + d3L.(xi' - v tau') + L tau' - (1-alpha)/(t-theta) d3L.(xi - v tau).
Expr gauge_rate_from_reduced_condition(const VariationalProblem& prob, const SymmetryGenerator& gen);

/// d3L.xi + (L - d3L.v) tau, i.e. the charge before subtracting Lambda.
Expr noether_charge_expr(const VariationalProblem& prob, const SymmetryGenerator& gen);

/// C = d3L.xi + (L - d3L.v) tau - Lambda sampled on the trajectory grid. Lambda is read from
/// `lambda_channel`, which must have been accumulated from gen.gauge_rate starting at a.
ChargeSeries noether_charge(const VariationalProblem& prob, const SymmetryGenerator& gen, const Trajectory& traj,
                            const std::string& lambda_channel = "Lambda");

/// dC/dtheta at every grid point, with accelerations taken from the explicit EL right-hand side.
/// Independent of any quadrature: vanishes along extremals whenever the gauge rate is consistent.
std::vector<double> noether_charge_rate(const VariationalProblem& prob, const SymmetryGenerator& gen,
                                        const Trajectory& traj);

/// Integrand of the "energy_correction" channel: d3L.v / (t - theta).
Expr energy_correction_integrand(const VariationalProblem& prob);
/// Integrand of the "momentum_correction_<i>" channel: d3L_i / (t - theta).
Expr momentum_correction_integrand(const VariationalProblem& prob, std::size_t i);
std::string momentum_channel_name(std::size_t i);

/// L - d3L.v - (1-alpha) * energy_correction. Throws PreconditionError for non-autonomous L.
ChargeSeries fractional_energy(const VariationalProblem& prob, const Trajectory& traj);

/// d3L_i + (1-alpha) * momentum_correction_i. Throws PreconditionError when L depends on q_i.
ChargeSeries fractional_momentum(const VariationalProblem& prob, const Trajectory& traj, std::size_t i);

/// Uncorrected classical quantities L - d3L.v and d3L_i (drift under alpha < 1).
ChargeSeries classical_energy(const VariationalProblem& prob, const Trajectory& traj);
ChargeSeries classical_momentum(const VariationalProblem& prob, const Trajectory& traj, std::size_t i);

/// `theta,value` rows followed by `# drift=<d> relative_drift=<r>`.
void write_charge_csv(std::ostream& os, const ChargeSeries& series);

}  // namespace fracnoether
