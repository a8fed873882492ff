#include "fracnoether/action.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fracnoether/error.hpp"

namespace fracnoether {

namespace {

// Lanczos coefficients for g = 7, n = 9 (Godfrey's set, as popularised by Numerical Recipes 3rd ed.
// and the common Python reference). Relative accuracy ~1e-15 for Re(x) >= 1/2.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoefficients = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

double lanczos(double x) {
  // Gamma(x) for x >= 1/2
  x -= 1.0;
  double series = kLanczosCoefficients[0];
  for (std::size_t i = 1; i < kLanczosCoefficients.size(); ++i) {
    series += kLanczosCoefficients[i] / (x + static_cast<double>(i));
  }
  const double t = x + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * series;
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_fn requires a positive finite argument");
  }
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos(1.0 - x));
  }
  return lanczos(x);
}

double simpson(std::span<const double> f, double h) {
  const std::size_t m = f.size() - 1;  // intervals
  if (f.size() < 3) throw ValidationError("Simpson quadrature needs at least two intervals");

  auto simpson_13 = [&](std::size_t begin, std::size_t end) {
    double s = f[begin] + f[end];
    for (std::size_t k = begin + 1; k < end; ++k) s += ((k - begin) % 2 == 1 ? 4.0 : 2.0) * f[k];
    return s * h / 3.0;
  };

  if (m % 2 == 0) return simpson_13(0, m);
  if (m == 3) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
  return simpson_13(0, m - 3) + 3.0 * h / 8.0 * (f[m - 3] + 3.0 * f[m - 2] + 3.0 * f[m - 1] + f[m]);
}

ActionValue fractional_action(const VariationalProblem& prob, const Trajectory& traj) {
  const std::size_t steps = traj.steps();
  if (steps < 2 || steps % 2 != 0) {
    throw ValidationError("action quadrature requires an even number of steps, got " + std::to_string(steps));
  }
  const FractionalParams& frac = prob.frac();
  const double h = (traj.theta.back() - traj.theta.front()) / static_cast<double>(steps);

  std::vector<double> integrand(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double theta = traj.theta[k];
    if (!(theta < frac.observer_time)) throw DomainError("action kernel requires theta < observer time");
    const double weight = frac.alpha == 1.0 ? 1.0 : std::pow(frac.observer_time - theta, frac.alpha - 1.0);
    integrand[k] = eval(prob.lagrangian(), traj.point(k)) * weight;
  }

  const double scale = 1.0 / gamma_fn(frac.alpha);
  ActionValue result;
  result.value = scale * simpson(integrand, h);

  std::vector<double> coarse;
  coarse.reserve(steps / 2 + 1);
  for (std::size_t k = 0; k <= steps; k += 2) coarse.push_back(integrand[k]);
  if (coarse.size() >= 3) {
    result.quadrature_error_estimate = std::fabs(result.value - scale * simpson(coarse, 2.0 * h));
  }
  return result;
}

StationarityReport stationarity_check(const VariationalProblem& prob, const Trajectory& extremal, const Expr& bump,
                                      std::span<const double> eps_ladder) {
  if (bump.depends_on(Var::Kind::Q) || bump.depends_on(Var::Kind::V)) {
    throw ValidationError("bump must be a function of theta only");
  }
  if (eps_ladder.size() < 2) throw ValidationError("stationarity check needs at least two eps values");
  const std::vector<double> none;
  const double at_a = eval(bump, extremal.theta.front(), none, none);
  const double at_b = eval(bump, extremal.theta.back(), none, none);
  if (std::fabs(at_a) > 1e-12 || std::fabs(at_b) > 1e-12) {
    throw ValidationError("bump must vanish at both interval endpoints");
  }
  const Expr bump_rate = diff(bump, Var::theta());

  std::vector<double> shape(extremal.theta.size()), shape_rate(extremal.theta.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    shape[k] = eval(bump, extremal.theta[k], none, none);
    shape_rate[k] = eval(bump_rate, extremal.theta[k], none, none);
  }

  auto perturbed_action = [&](double eps) {
    Trajectory t = extremal;
    for (std::size_t k = 0; k < shape.size(); ++k) {
      for (double& x : t.q[k]) x += eps * shape[k];
      for (double& x : t.v[k]) x += eps * shape_rate[k];
    }
    return fractional_action(prob, t).value;
  };

  StationarityReport report;
  report.action = fractional_action(prob, extremal).value;
  std::vector<double> log_eps, log_delta;
  for (double eps : eps_ladder) {
    const double d = perturbed_action(eps) - report.action;
    report.eps.push_back(eps);
    report.delta.push_back(d);
    log_eps.push_back(std::log(eps));
    log_delta.push_back(std::log(std::max(std::fabs(d), 1e-300)));
  }
  report.exponent = fit_slope(log_eps, log_delta);

  const double smallest = *std::min_element(eps_ladder.begin(), eps_ladder.end());
  report.first_order_coefficient = (perturbed_action(smallest) - perturbed_action(-smallest)) / (2.0 * smallest);
  report.first_order_threshold = 1e-6 * std::fabs(report.action) + 1e-9;
  report.stationary = std::fabs(report.exponent - 2.0) <= 0.2 &&
                      std::fabs(report.first_order_coefficient) < report.first_order_threshold;
  return report;
}

}  // namespace fracnoether
