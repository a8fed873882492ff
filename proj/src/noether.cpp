#include "fracnoether/noether.hpp"

#include <algorithm>
#include <cmath>

#include "fracnoether/error.hpp"

namespace fracnoether {

SymmetryGenerator SymmetryGenerator::create(Expr tau, std::vector<Expr> xi, std::optional<Expr> gauge_rate) {
  if (tau.depends_on(Var::Kind::V)) throw ValidationError("generator tau must not depend on velocities");
  for (const Expr& x : xi) {
    if (x.depends_on(Var::Kind::V)) throw ValidationError("generator xi must not depend on velocities");
  }
  return SymmetryGenerator{std::move(tau), std::move(xi), std::move(gauge_rate)};
}

SymmetryGenerator SymmetryGenerator::with_gauge_rate(Expr rate) const {
  SymmetryGenerator copy = *this;
  copy.gauge_rate = std::move(rate);
  return copy;
}

Drift drift(std::span<const double> values) {
  Drift d;
  if (values.empty()) return d;
  double peak = 0.0;
  for (double x : values) {
    d.absolute = std::max(d.absolute, std::fabs(x - values.front()));
    peak = std::max(peak, std::fabs(x));
  }
  d.relative = d.absolute / (1.0 + peak);
  return d;
}

Drift drift(const ChargeSeries& series) { return drift(series.values); }

namespace {

ChargeSeries make_series(std::string label, const Trajectory& traj, std::vector<double> values) {
  ChargeSeries s;
  s.label = std::move(label);
  s.theta = traj.theta;
  s.values = std::move(values);
  const Drift d = drift(s.values);
  s.drift = d.absolute;
  s.relative_drift = d.relative;
  return s;
}

void check_generator_dims(const VariationalProblem& prob, const SymmetryGenerator& gen) {
  if (gen.xi.size() != prob.dof()) {
    throw ValidationError("generator xi has " + std::to_string(gen.xi.size()) + " components, problem has " +
                          std::to_string(prob.dof()) + " degrees of freedom");
  }
}

// (theta, q) functions: d/dtheta along the motion needs no acceleration.
double rate_of(const Expr& e, const EvalPoint& p) { return total_derivative(e, p); }

// `derivative` must vanish everywhere along the trajectory for a precondition to hold.
bool vanishes_along(const Expr& derivative, const Expr& reference, const Trajectory& traj) {
  if (derivative.is_constant(0.0)) return true;
  for (std::size_t k = 0; k < traj.theta.size(); ++k) {
    const EvalPoint p = traj.point(k);
    if (std::fabs(eval(derivative, p)) > 1e-12 * (1.0 + std::fabs(eval(reference, p)))) return false;
  }
  return true;
}

double momentum_dot_velocity(const LagrangianDerivatives& d, const EvalPoint& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.v.size(); ++i) s += eval(d.momentum[i], p) * p.v[i];
  return s;
}

}  // namespace

double total_derivative(const Expr& e, const EvalPoint& p, std::span<const double> accel) {
  double result = eval(diff(e, Var::theta()), p);
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    const Expr dq = diff(e, Var::q(i));
    if (!dq.is_constant(0.0)) result += eval(dq, p) * p.v[i];
  }
  if (e.depends_on(Var::Kind::V)) {
    if (accel.size() != p.v.size()) {
      throw PreconditionError("total derivative of a velocity-dependent expression needs the acceleration");
    }
    for (std::size_t i = 0; i < p.v.size(); ++i) {
      const Expr dv = diff(e, Var::v(i));
      if (!dv.is_constant(0.0)) result += eval(dv, p) * accel[i];
    }
  }
  return result;
}

Expr rate_along_motion(const Expr& e, std::size_t n) {
  if (e.depends_on(Var::Kind::V)) throw PreconditionError("rate_along_motion expects a function of (theta, q)");
  Expr r = diff(e, Var::theta());
  for (std::size_t i = 0; i < n; ++i) r = r + diff(e, Var::q(i)) * Expr::variable(Var::v(i));
  return r;
}

double quasi_invariance_residual(const VariationalProblem& prob, const SymmetryGenerator& gen, const EvalPoint& p) {
  check_generator_dims(prob, gen);
  if (!gen.gauge_rate) throw PreconditionError("quasi-invariance residual requires a gauge rate");
  if (!(p.theta < prob.frac().observer_time)) throw DomainError("theta is not before the observer time");

  const auto& d = prob.derivatives();
  const double tau = eval(gen.tau, p);
  const double tau_dot = rate_of(gen.tau, p);
  const double L = eval(d.L, p);

  double r = eval(d.dtheta, p) * tau;
  for (std::size_t i = 0; i < prob.dof(); ++i) {
    const double xi = eval(gen.xi[i], p);
    const double xi_dot = rate_of(gen.xi[i], p);
    r += eval(d.dq[i], p) * xi + eval(d.momentum[i], p) * (xi_dot - p.v[i] * tau_dot);
  }
  r += L * (tau_dot + prob.frac().kernel_rate(p.theta) * tau);
  return r - eval(*gen.gauge_rate, p);
}

double kernel_term_residual(const VariationalProblem& prob, const SymmetryGenerator& gen, const EvalPoint& p) {
  check_generator_dims(prob, gen);
  const auto& d = prob.derivatives();
  const double tau = eval(gen.tau, p);
  double r = eval(d.L, p) * tau;
  for (std::size_t i = 0; i < prob.dof(); ++i) {
    r += eval(d.momentum[i], p) * (eval(gen.xi[i], p) - p.v[i] * tau);
  }
  return r;
}

Expr gauge_rate_from_reduced_condition(const VariationalProblem& prob, const SymmetryGenerator& gen) {
  check_generator_dims(prob, gen);
  const std::size_t n = prob.dof();
  const auto& d = prob.derivatives();
  const Expr tau_dot = rate_along_motion(gen.tau, n);
  const Expr kernel = prob.frac().kernel_rate_expr();

  Expr rate = d.dtheta * gen.tau + d.L * tau_dot;
  for (std::size_t i = 0; i < n; ++i) {
    const Expr vi = Expr::variable(Var::v(i));
    const Expr xi_dot = rate_along_motion(gen.xi[i], n);
    rate = rate + d.dq[i] * gen.xi[i] + d.momentum[i] * (xi_dot - vi * tau_dot) -
           kernel * d.momentum[i] * (gen.xi[i] - vi * gen.tau);
  }
  return rate;
}

Expr noether_charge_expr(const VariationalProblem& prob, const SymmetryGenerator& gen) {
  check_generator_dims(prob, gen);
  const auto& d = prob.derivatives();
  Expr hamiltonian_like = d.L;
  Expr transport;
  for (std::size_t i = 0; i < prob.dof(); ++i) {
    hamiltonian_like = hamiltonian_like - d.momentum[i] * Expr::variable(Var::v(i));
    transport = transport + d.momentum[i] * gen.xi[i];
  }
  return transport + hamiltonian_like * gen.tau;
}

ChargeSeries noether_charge(const VariationalProblem& prob, const SymmetryGenerator& gen, const Trajectory& traj,
                            const std::string& lambda_channel) {
  auto it = traj.channels.find(lambda_channel);
  if (it == traj.channels.end()) {
    throw PreconditionError("trajectory is missing the gauge channel '" + lambda_channel + "'");
  }
  const std::vector<double>& lambda = it->second;
  const Expr c = noether_charge_expr(prob, gen);

  std::vector<double> values(traj.theta.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = eval(c, traj.point(k)) - lambda[k];
  return make_series("noether", traj, std::move(values));
}

std::vector<double> noether_charge_rate(const VariationalProblem& prob, const SymmetryGenerator& gen,
                                        const Trajectory& traj) {
  if (!gen.gauge_rate) throw PreconditionError("charge rate requires a gauge rate");
  const std::size_t n = prob.dof();
  const Expr c = noether_charge_expr(prob, gen);
  const Expr c_theta = diff(c, Var::theta());
  std::vector<Expr> c_q(n), c_v(n);
  for (std::size_t i = 0; i < n; ++i) {
    c_q[i] = diff(c, Var::q(i));
    c_v[i] = diff(c, Var::v(i));
  }
  const OdeRightHandSide rhs = to_explicit_ode(prob);

  std::vector<double> rates(traj.theta.size());
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const EvalPoint p = traj.point(k);
    const std::vector<double> accel = rhs(p.theta, p.q, p.v);
    double r = eval(c_theta, p);
    for (std::size_t i = 0; i < n; ++i) r += eval(c_q[i], p) * p.v[i] + eval(c_v[i], p) * accel[i];
    rates[k] = r - eval(*gen.gauge_rate, p);
  }
  return rates;
}

Expr energy_correction_integrand(const VariationalProblem& prob) {
  const auto& d = prob.derivatives();
  Expr pv;
  for (std::size_t i = 0; i < prob.dof(); ++i) pv = pv + d.momentum[i] * Expr::variable(Var::v(i));
  return pv / (Expr(prob.frac().observer_time) - Expr::variable(Var::theta()));
}

Expr momentum_correction_integrand(const VariationalProblem& prob, std::size_t i) {
  if (i >= prob.dof()) throw ValidationError("momentum index out of range");
  return prob.derivatives().momentum[i] / (Expr(prob.frac().observer_time) - Expr::variable(Var::theta()));
}

std::string momentum_channel_name(std::size_t i) { return "momentum_correction_" + std::to_string(i); }

ChargeSeries fractional_energy(const VariationalProblem& prob, const Trajectory& traj) {
  const auto& d = prob.derivatives();
  if (!vanishes_along(d.dtheta, d.L, traj)) {
    throw PreconditionError("energy charge requires an autonomous Lagrangian (L depends on theta)");
  }
  const std::vector<double>& correction = traj.channel("energy_correction");
  const double weight = 1.0 - prob.frac().alpha;

  std::vector<double> values(traj.theta.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const EvalPoint p = traj.point(k);
    values[k] = eval(d.L, p) - momentum_dot_velocity(d, p) - weight * correction[k];
  }
  return make_series("energy", traj, std::move(values));
}

ChargeSeries fractional_momentum(const VariationalProblem& prob, const Trajectory& traj, std::size_t i) {
  if (i >= prob.dof()) throw ValidationError("momentum index out of range");
  const auto& d = prob.derivatives();
  if (!vanishes_along(d.dq[i], d.L, traj)) {
    throw PreconditionError("momentum charge for dof " + std::to_string(i) + " requires L independent of q" +
                            std::to_string(i));
  }
  const std::vector<double>& correction = traj.channel(momentum_channel_name(i));
  const double weight = 1.0 - prob.frac().alpha;

  std::vector<double> values(traj.theta.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = eval(d.momentum[i], traj.point(k)) + weight * correction[k];
  }
  return make_series("momentum_" + std::to_string(i), traj, std::move(values));
}

ChargeSeries classical_energy(const VariationalProblem& prob, const Trajectory& traj) {
  const auto& d = prob.derivatives();
  std::vector<double> values(traj.theta.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const EvalPoint p = traj.point(k);
    values[k] = eval(d.L, p) - momentum_dot_velocity(d, p);
  }
  return make_series("classical_energy", traj, std::move(values));
}

ChargeSeries classical_momentum(const VariationalProblem& prob, const Trajectory& traj, std::size_t i) {
  if (i >= prob.dof()) throw ValidationError("momentum index out of range");
  std::vector<double> values(traj.theta.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = eval(prob.derivatives().momentum[i], traj.point(k));
  return make_series("classical_momentum_" + std::to_string(i), traj, std::move(values));
}

void write_charge_csv(std::ostream& os, const ChargeSeries& series) {
  os << "theta,value\n";
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    os << format_double(series.theta[k]) << ',' << format_double(series.values[k]) << '\n';
  }
  os << "# drift=" << format_double(series.drift) << " relative_drift=" << format_double(series.relative_drift)
     << '\n';
}

}  // namespace fracnoether
