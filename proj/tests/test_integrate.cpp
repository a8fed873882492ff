#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "fracnoether/error.hpp"
#include "fracnoether/integrate.hpp"

using namespace fracnoether;

namespace {

// Shooting velocity of the alpha = 1/2, t = 2 free particle from q(0) = 0 to q(1) = 1:
// 1 / integral_0^1 ((2 - s)/2)^(1/2) ds, evaluated once by 30-digit adaptive quadrature.
constexpr double kFractionalShootingVelocity = 1.1601886205085204;

VariationalProblem problem(const char* lagrangian, double alpha, std::optional<BoundaryValues> bv = std::nullopt) {
  return VariationalProblem::create(1, parse(lagrangian, 1), {0.0, 1.0}, {alpha, 2.0}, std::move(bv));
}

OdeRightHandSide zero_rhs() {
  return [](double, std::span<const double> q, std::span<const double>) { return std::vector<double>(q.size(), 0.0); };
}

}  // namespace

TEST_SUITE("integrate") {
  TEST_CASE("constant right-hand side is integrated exactly") {
    const std::vector<double> q0 = {0.0}, v0 = {1.0};
    const Trajectory traj = ivp_solve(zero_rhs(), {0.0, 1.0}, q0, v0, 10);
    CHECK(traj.q.back()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(traj.theta.size() == 11);
    CHECK(traj.theta.back() == 1.0);
  }

  TEST_CASE("fractional free particle velocity matches the closed form") {
    const auto prob = problem("v0^2/2", 0.5);
    const std::vector<double> q0 = {0.0}, v0 = {1.0};
    const Trajectory traj = ivp_solve(to_explicit_ode(prob), prob.interval(), q0, v0, 1000);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.theta.size(); ++k) {
      const double exact = std::sqrt((2.0 - traj.theta[k]) / 2.0);
      worst = std::max(worst, std::fabs(traj.v[k][0] - exact) / exact);
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("channels accumulate integrals from a") {
    const std::vector<double> q0 = {0.0}, v0 = {1.0};
    const Integrands integrands = {{"one", Expr(1.0)}, {"position", parse("q0", 1)}};
    const Trajectory traj = ivp_solve(zero_rhs(), {0.5, 2.0}, q0, v0, 30, integrands);
    CHECK(std::fabs(traj.channel("one").back() - 1.5) < 1e-12);
    // q = theta - 0.5, integral from 0.5 to 2 is 1.125; RK4 stages integrate it exactly
    CHECK(traj.channel("position").back() == doctest::Approx(1.125).epsilon(1e-14));
    for (const auto& [name, data] : traj.channels) {
      CHECK(data.front() == 0.0);
      CHECK(data.size() == traj.theta.size());
    }
    CHECK_THROWS_AS((void)traj.channel("missing"), PreconditionError);
  }

  TEST_CASE("grid is uniform and strictly increasing") {
    const std::vector<double> q0 = {0.0}, v0 = {1.0};
    const Trajectory traj = ivp_solve(zero_rhs(), {-0.3, 0.7}, q0, v0, 997);
    const double h = 1.0 / 997.0;
    for (std::size_t k = 1; k < traj.theta.size(); ++k) {
      CHECK(traj.theta[k] > traj.theta[k - 1]);
      CHECK(std::fabs((traj.theta[k] - traj.theta[k - 1]) - h) <= 1e-12 * h + 1e-16);
    }
  }

  TEST_CASE("channel accumulation is additive across split runs") {
    const auto prob = problem("(v0^2 - q0^2)/2", 0.6);
    const auto rhs = to_explicit_ode(prob);
    const Integrands integrands = {{"g", parse("v0^2/(2 - theta) + sin(q0)", 1)}};
    const std::vector<double> q0 = {0.4}, v0 = {-0.2};
    const Trajectory whole = ivp_solve(rhs, {0.0, 1.0}, q0, v0, 1000, integrands);
    const Trajectory first = ivp_solve(rhs, {0.0, 0.5}, q0, v0, 500, integrands);
    const Trajectory second = ivp_solve(rhs, {0.5, 1.0}, first.q.back(), first.v.back(), 500, integrands);
    CHECK(std::fabs(first.channel("g").back() + second.channel("g").back() - whole.channel("g").back()) < 1e-10);
  }

  TEST_CASE("ivp errors") {
    const std::vector<double> q0 = {1.0}, v0 = {0.0};
    CHECK_THROWS_AS((void)ivp_solve(zero_rhs(), {0.0, 1.0}, q0, v0, 1), ValidationError);
    const OdeRightHandSide explosive = [](double, std::span<const double> q, std::span<const double>) {
      return std::vector<double>{1e300 * q[0] * q[0]};
    };
    CHECK_THROWS_AS((void)ivp_solve(explosive, {0.0, 1.0}, q0, v0, 100), BlowUpError);
  }

  TEST_CASE("shooting examples") {
    SUBCASE("classical free particle") {
      const auto r = bvp_shoot(problem("v0^2/2", 1.0, BoundaryValues{{0.0}, {1.0}}), 1000);
      CHECK(r.report.converged);
      CHECK(r.report.initial_velocity[0] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(r.report.iterations == 0);
    }
    SUBCASE("fractional free particle converges in one Newton step") {
      const auto r = bvp_shoot(problem("v0^2/2", 0.5, BoundaryValues{{0.0}, {1.0}}), 1000);
      CHECK(r.report.converged);
      CHECK(r.report.iterations == 1);
      CHECK(std::fabs(r.report.initial_velocity[0] - kFractionalShootingVelocity) < 1e-8);
      CHECK(std::fabs(r.report.boundary_miss[0]) <= 1e-9);
    }
    SUBCASE("harmonic oscillator") {
      const auto r = bvp_shoot(problem("(v0^2 - q0^2)/2", 1.0, BoundaryValues{{0.0}, {std::sin(1.0)}}), 1000);
      CHECK(r.report.converged);
      CHECK(std::fabs(r.report.initial_velocity[0] - 1.0) < 1e-6);
    }
    SUBCASE("nonlinear pendulum needs several iterations") {
      const auto r = bvp_shoot(problem("v0^2/2 + 4*cos(q0)", 0.7, BoundaryValues{{0.0}, {2.0}}), 400);
      CHECK(r.report.converged);
      CHECK(r.report.iterations >= 2);
      CHECK(std::fabs(r.trajectory.q.back()[0] - 2.0) <= 1e-9);
    }
  }

  TEST_CASE("shooting failures") {
    ShootingOptions opts;
    opts.max_iter = 0;
    const auto r = bvp_shoot(problem("v0^2/2", 0.5, BoundaryValues{{0.0}, {1.0}}), 100, opts);
    CHECK_FALSE(r.report.converged);
    CHECK(std::fabs(r.report.boundary_miss[0]) > 1e-9);
    CHECK_THROWS_AS((void)bvp_shoot(problem("v0^2/2", 0.5), 100), ValidationError);
  }

  TEST_CASE("convergence order examples") {
    const std::vector<std::size_t> ladder = {100, 200, 400, 800};
    const auto osc = convergence_order(problem("(v0^2 - q0^2)/2", 1.0), [](double th) {
      return std::pair{std::vector<double>{std::cos(th)}, std::vector<double>{-std::sin(th)}};
    }, ladder);
    REQUIRE(osc.order);
    CHECK(*osc.order == doctest::Approx(4.0).epsilon(0.075));

    const auto fp = convergence_order(problem("v0^2/2", 0.5), [](double th) {
      const double p = 1.5;
      return std::pair{std::vector<double>{(std::pow(2.0, p) - std::pow(2.0 - th, p)) / (p * std::sqrt(2.0))},
                       std::vector<double>{std::sqrt((2.0 - th) / 2.0)}};
    }, ladder);
    REQUIRE(fp.order);
    CHECK(std::fabs(*fp.order - 4.0) <= 0.3);
    // doubling N cuts the error by ~16
    for (std::size_t i = 1; i < fp.max_errors.size(); ++i) {
      CHECK(fp.max_errors[i - 1] / fp.max_errors[i] > 12.0);
    }

    const auto flat = convergence_order(problem("v0^2/2", 1.0), [](double th) {
      return std::pair{std::vector<double>{th}, std::vector<double>{1.0}};
    }, ladder);
    CHECK_FALSE(flat.order.has_value());
  }

  TEST_CASE("trajectory CSV layout and precision") {
    const std::vector<double> q0 = {0.1, 0.2}, v0 = {1.0 / 3.0, -1.0};
    const OdeRightHandSide rhs = [](double, std::span<const double> q, std::span<const double>) {
      return std::vector<double>{-q[0], -q[1]};
    };
    const Trajectory traj = ivp_solve(rhs, {0.0, 1.0}, q0, v0, 4, {{"Lambda", parse("v0*q1", 2)}});
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta,q0,q1,v0,v1,Lambda");
    int rows = 0;
    while (std::getline(in, line)) {
      if (rows == 0) {
        // fields round-trip to the exact doubles
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> parsed;
        while (std::getline(fields, cell, ',')) parsed.push_back(std::stod(cell));
        CHECK(parsed[3] == v0[0]);
      }
      ++rows;
    }
    CHECK(rows == 5);
  }
}
