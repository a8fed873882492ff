#include "fracnoether/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fracnoether/error.hpp"

namespace fracnoether {

const std::vector<double>& Trajectory::channel(const std::string& name) const {
  auto it = channels.find(name);
  if (it == channels.end()) throw PreconditionError("trajectory has no channel '" + name + "'");
  return it->second;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Kahan-compensated x += increment; keeps accumulated rounding below the RK4 truncation error
// on fine grids.
void compensated_add(double& x, double& carry, double increment) {
  const double y = increment - carry;
  const double t = x + y;
  carry = (t - x) - y;
  x = t;
}

}  // namespace

Trajectory ivp_solve(const OdeRightHandSide& rhs, Interval interval, std::span<const double> q0,
                     std::span<const double> v0, std::size_t steps, const Integrands& integrands) {
  if (steps < 2) throw ValidationError("at least 2 integration steps are required");
  if (q0.size() != v0.size() || q0.empty()) throw ValidationError("q0 and v0 must have equal positive length");
  if (!(interval.a < interval.b)) throw ValidationError("interval must satisfy a < b");

  const std::size_t n = q0.size();
  const double a = interval.a;
  const double span = interval.b - interval.a;

  Trajectory traj;
  traj.theta.resize(steps + 1);
  traj.q.reserve(steps + 1);
  traj.v.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    traj.theta[k] = k == steps ? interval.b : a + span * static_cast<double>(k) / static_cast<double>(steps);
  }

  std::vector<const Expr*> integrand_exprs;
  std::vector<std::vector<double>*> channel_data;
  for (const auto& [name, expr] : integrands) {
    auto& data = traj.channels[name];
    data.assign(steps + 1, 0.0);
    integrand_exprs.push_back(&expr);
    channel_data.push_back(&data);
  }
  const std::size_t m = integrand_exprs.size();

  std::vector<double> q(q0.begin(), q0.end());
  std::vector<double> v(v0.begin(), v0.end());
  if (!all_finite(q) || !all_finite(v)) throw BlowUpError(a);
  traj.q.push_back(q);
  traj.v.push_back(v);

  std::vector<double> acc(m, 0.0), acc_carry(m, 0.0);
  std::vector<double> q_carry(n, 0.0), v_carry(n, 0.0);
  std::vector<double> qs(n), vs(n);
  std::vector<double> dq_sum(n), dv_sum(n), g_sum(m);

  auto stage_integrands = [&](double theta, std::span<const double> sq, std::span<const double> sv, double weight) {
    for (std::size_t c = 0; c < m; ++c) g_sum[c] += weight * eval(*integrand_exprs[c], theta, sq, sv);
  };

  for (std::size_t k = 0; k < steps; ++k) {
    const double theta = traj.theta[k];
    const double step = traj.theta[k + 1] - theta;
    std::fill(g_sum.begin(), g_sum.end(), 0.0);

    // stage 1
    std::vector<double> k1v = rhs(theta, q, v);
    const std::vector<double>& k1q = v;
    stage_integrands(theta, q, v, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      qs[i] = q[i] + 0.5 * step * k1q[i];
      vs[i] = v[i] + 0.5 * step * k1v[i];
    }
    // stage 2
    const std::vector<double> k2q = vs;
    std::vector<double> k2v = rhs(theta + 0.5 * step, qs, vs);
    stage_integrands(theta + 0.5 * step, qs, vs, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      qs[i] = q[i] + 0.5 * step * k2q[i];
      vs[i] = v[i] + 0.5 * step * k2v[i];
    }
    // stage 3
    const std::vector<double> k3q = vs;
    std::vector<double> k3v = rhs(theta + 0.5 * step, qs, vs);
    stage_integrands(theta + 0.5 * step, qs, vs, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      qs[i] = q[i] + step * k3q[i];
      vs[i] = v[i] + step * k3v[i];
    }
    // stage 4
    const std::vector<double> k4q = vs;
    std::vector<double> k4v = rhs(theta + step, qs, vs);
    stage_integrands(theta + step, qs, vs, 1.0);

    for (std::size_t i = 0; i < n; ++i) {
      dq_sum[i] = k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i];
      dv_sum[i] = k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      compensated_add(q[i], q_carry[i], step / 6.0 * dq_sum[i]);
      compensated_add(v[i], v_carry[i], step / 6.0 * dv_sum[i]);
    }
    for (std::size_t c = 0; c < m; ++c) {
      compensated_add(acc[c], acc_carry[c], step / 6.0 * g_sum[c]);
      (*channel_data[c])[k + 1] = acc[c];
    }
    if (!all_finite(q) || !all_finite(v) || !all_finite(acc)) throw BlowUpError(traj.theta[k + 1]);
    traj.q.push_back(q);
    traj.v.push_back(v);
  }
  return traj;
}

namespace {

std::vector<double> boundary_miss(const Trajectory& traj, const std::vector<double>& qb) {
  std::vector<double> miss(qb.size());
  for (std::size_t i = 0; i < qb.size(); ++i) miss[i] = traj.q.back()[i] - qb[i];
  return miss;
}

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

ShootingResult bvp_shoot(const VariationalProblem& prob, std::size_t steps, const ShootingOptions& options,
                         const Integrands& integrands) {
  if (!prob.boundary()) throw ValidationError("boundary values are required for shooting");
  if (!(options.tol > 0.0)) throw ValidationError("shooting tolerance must be positive");

  const std::size_t n = prob.dof();
  const auto& bv = *prob.boundary();
  const Interval iv = prob.interval();
  const OdeRightHandSide rhs = to_explicit_ode(prob);

  auto shoot = [&](const std::vector<double>& v0) {
    return boundary_miss(ivp_solve(rhs, iv, bv.qa, v0, steps), bv.qb);
  };

  // straight-line guess
  std::vector<double> v0(n);
  for (std::size_t i = 0; i < n; ++i) v0[i] = (bv.qb[i] - bv.qa[i]) / (iv.b - iv.a);

  ShootingReport report;
  std::vector<double> miss = shoot(v0);
  while (max_abs(miss) > options.tol && report.iterations < options.max_iter) {
    std::vector<double> jacobian(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> probe = v0;
      const double dv = 1e-6 * (1.0 + std::fabs(v0[j]));
      probe[j] += dv;
      const std::vector<double> probe_miss = shoot(probe);
      for (std::size_t i = 0; i < n; ++i) jacobian[i * n + j] = (probe_miss[i] - miss[i]) / dv;
    }
    std::vector<double> neg_miss(n);
    for (std::size_t i = 0; i < n; ++i) neg_miss[i] = -miss[i];
    auto delta = solve_linear(std::move(jacobian), std::move(neg_miss));
    if (!delta) throw SingularJacobianError("singular shooting Jacobian at iteration " + std::to_string(report.iterations));
    for (std::size_t i = 0; i < n; ++i) v0[i] += (*delta)[i];
    ++report.iterations;
    miss = shoot(v0);
  }

  ShootingResult result;
  result.trajectory = ivp_solve(rhs, iv, bv.qa, v0, steps, integrands);
  report.boundary_miss = boundary_miss(result.trajectory, bv.qb);
  report.converged = max_abs(report.boundary_miss) <= options.tol;
  report.initial_velocity = v0;
  result.report = std::move(report);
  return result;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const auto count = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

ConvergenceResult convergence_order(const VariationalProblem& prob, const ExactSolution& exact,
                                    std::span<const std::size_t> step_counts) {
  const Interval iv = prob.interval();
  const OdeRightHandSide rhs = to_explicit_ode(prob);
  const auto [qa, va] = exact(iv.a);

  ConvergenceResult result;
  double scale = 0.0;
  for (std::size_t steps : step_counts) {
    const Trajectory traj = ivp_solve(rhs, iv, qa, va, steps);
    double err = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const auto [qe, ve] = exact(traj.theta[k]);
      for (std::size_t i = 0; i < qe.size(); ++i) {
        err = std::max({err, std::fabs(traj.q[k][i] - qe[i]), std::fabs(traj.v[k][i] - ve[i])});
        scale = std::max({scale, std::fabs(qe[i]), std::fabs(ve[i])});
      }
    }
    result.steps.push_back(steps);
    result.max_errors.push_back(err);
  }

  if (result.steps.size() < 2) return result;
  const double coarsest = *std::max_element(result.max_errors.begin(), result.max_errors.end());
  if (coarsest <= 1e-13 * (1.0 + scale)) return result;  // order indeterminate

  std::vector<double> log_h, log_err;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    log_h.push_back(std::log((iv.b - iv.a) / static_cast<double>(result.steps[i])));
    log_err.push_back(std::log(std::max(result.max_errors[i], 1e-300)));
  }
  result.order = fit_slope(log_h, log_err);
  return result;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.dof();
  os << "theta";
  for (std::size_t i = 0; i < n; ++i) os << ",q" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",v" << i;
  for (const auto& [name, data] : traj.channels) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < traj.theta.size(); ++k) {
    os << format_double(traj.theta[k]);
    for (double x : traj.q[k]) os << ',' << format_double(x);
    for (double x : traj.v[k]) os << ',' << format_double(x);
    for (const auto& [name, data] : traj.channels) os << ',' << format_double(data[k]);
    os << '\n';
  }
}

}  // namespace fracnoether
