#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracnoether/acceptance.hpp"
#include "fracnoether/error.hpp"
#include "fracnoether/expr.hpp"

using namespace fracnoether;

namespace {

EvalPoint point(double theta, std::vector<double> q, std::vector<double> v) { return {theta, std::move(q), std::move(v)}; }

EvalPoint random_point(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EvalPoint p{u(rng), std::vector<double>(n), std::vector<double>(n)};
  for (auto& x : p.q) x = u(rng);
  for (auto& x : p.v) x = u(rng);
  return p;
}

}  // namespace

TEST_SUITE("expr") {
  TEST_CASE("parse maps the grammar onto the node set") {
    const Expr kinetic = parse("v0^2 / 2", 1);
    CHECK(eval(kinetic, point(0.0, {1.0}, {2.0})) == 2.0);
    const Expr reference = Expr::variable(Var::v(0)) * Expr::variable(Var::v(0)) * 0.5;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
      const EvalPoint p = random_point(rng, 1);
      CHECK(eval(kinetic, p) == doctest::Approx(eval(reference, p)).epsilon(1e-15));
    }

    const Expr e = parse("sin(q0) + theta", 1);
    REQUIRE(e.op() == Expr::Op::Add);
    CHECK(e.lhs().op() == Expr::Op::Sin);
    CHECK(e.lhs().lhs().op() == Expr::Op::Q);
    CHECK(e.lhs().lhs().index() == 0);
    CHECK(e.rhs().op() == Expr::Op::Theta);
  }

  TEST_CASE("parse rejects out-of-range variables and reports positions") {
    try {
      (void)parse("v2", 2);
      FAIL("expected ParseError");
    } catch (const ParseError& err) {
      CHECK(std::string(err.what()).find("out of range") != std::string::npos);
      CHECK(err.position() == 0);
    }
    try {
      (void)parse("q0 + * 2", 1);
      FAIL("expected ParseError");
    } catch (const ParseError& err) {
      CHECK(err.position() == 5);
    }
    CHECK_THROWS_AS((void)parse("foo(q0)", 1), ParseError);
    CHECK_THROWS_AS((void)parse("(q0 + 1", 1), ParseError);
    CHECK_THROWS_AS((void)parse("q0 q0", 1), ParseError);
    CHECK_THROWS_AS((void)parse("", 1), ParseError);
    CHECK_THROWS_AS((void)parse("2x", 1), ParseError);
  }

  TEST_CASE("operator precedence and associativity") {
    const EvalPoint p = point(0.0, {2.0}, {3.0});
    CHECK(eval(parse("-q0^2", 1), p) == -4.0);
    CHECK(eval(parse("2^3^2", 1), p) == 512.0);
    CHECK(eval(parse("q0 - v0 - 1", 1), p) == -2.0);
    CHECK(eval(parse("v0 / q0 * 2", 1), p) == 3.0);
    CHECK(eval(parse("q0^-2", 1), p) == 0.25);
    CHECK(eval(parse("pi", 1), p) == std::numbers::pi);
    CHECK(eval(parse("1.5e1 + .5", 1), p) == 15.5);
  }

  TEST_CASE("named constants bind at parse time") {
    const Expr e = parse("(1 - alpha)/(t - theta)", 1, {{"alpha", 0.5}, {"t", 2.0}});
    CHECK(eval(e, point(1.0, {0.0}, {0.0})) == 0.5);
    CHECK_THROWS_AS((void)parse("alpha", 1), ParseError);
  }

  TEST_CASE("eval examples") {
    CHECK(eval(parse("v0^2/2", 1), point(0.0, {1.0}, {2.0})) == 2.0);
    CHECK_THROWS_AS((void)eval(parse("ln(q0)", 1), point(0.0, {0.0}, {0.0})), DomainError);
    CHECK(eval(parse("sin(q0)*v0", 1), point(0.0, {std::numbers::pi / 2}, {3.0})) == doctest::Approx(3.0));
  }

  TEST_CASE("eval reports domain errors instead of non-finite values") {
    const EvalPoint p = point(0.0, {-1.0}, {0.0});
    CHECK_THROWS_AS((void)eval(parse("1/v0", 1), p), DomainError);
    CHECK_THROWS_AS((void)eval(parse("sqrt(q0)", 1), p), DomainError);
    CHECK_THROWS_AS((void)eval(parse("exp(1000*(q0+2))", 1), p), DomainError);
    CHECK_THROWS_AS((void)eval(parse("q0^0.5", 1), p), DomainError);
    // integer powers are products, so negative bases are fine
    CHECK(eval(parse("q0^3", 1), point(0.0, {-2.0}, {0.0})) == -8.0);
    CHECK(eval(parse("q0^-2", 1), point(0.0, {-2.0}, {0.0})) == 0.25);
  }

  TEST_CASE("variable exponents go through exp and ln") {
    const Expr e = parse("q0^v0", 1);
    CHECK(eval(e, point(0.0, {2.0}, {3.0})) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)eval(e, point(0.0, {-2.0}, {3.0})), DomainError);
  }

  TEST_CASE("diff examples") {
    std::mt19937_64 rng(2);
    const Expr dv = diff(parse("v0^2/2", 1), Var::v(0));
    const Expr dq = diff(parse("sin(q0)", 1), Var::q(0));
    for (int i = 0; i < 10; ++i) {
      const EvalPoint p = random_point(rng, 1);
      CHECK(eval(dv, p) == doctest::Approx(p.v[0]).epsilon(1e-15));
      CHECK(eval(dq, p) == doctest::Approx(std::cos(p.q[0])).epsilon(1e-15));
    }
    CHECK(diff(parse("q0*theta", 1), Var::v(0)).is_constant(0.0));
  }

  TEST_CASE("symbolic derivatives agree with centered finite differences") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const Expr e = random_smooth_expression(rng, 2, 4);
      const EvalPoint p = random_point(rng, 2);
      for (Var var : {Var::theta(), Var::q(0), Var::q(1), Var::v(0), Var::v(1)}) {
        const double symbolic = eval(diff(e, var), p);
        const double numeric = central_difference(e, p, var, 1e-6);
        CHECK(std::fabs(symbolic - numeric) < 1e-6 * (1.0 + std::fabs(numeric)));
      }
    }
  }

  TEST_CASE("mixed partials commute") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const Expr e = random_smooth_expression(rng, 2, 4);
      const EvalPoint p = random_point(rng, 2);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          const double qv = eval(diff(diff(e, Var::q(i)), Var::v(j)), p);
          const double vq = eval(diff(diff(e, Var::v(j)), Var::q(i)), p);
          CHECK(std::fabs(qv - vq) <= 1e-9 * (1.0 + std::fabs(qv)));
        }
      }
    }
  }

  TEST_CASE("eval is pure and text round-trips") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const Expr e = random_smooth_expression(rng, 2, 4);
      const EvalPoint p = random_point(rng, 2);
      const double first = eval(e, p);
      CHECK(eval(e, p) == first);
      const Expr reparsed = parse(e.to_string(), 2);
      CHECK(eval(reparsed, p) == doctest::Approx(first).epsilon(1e-13));
    }
  }

  TEST_CASE("dependency queries") {
    const Expr e = parse("theta*q1 + v0", 2);
    CHECK(e.depends_on(Var::Kind::Theta));
    CHECK(e.depends_on(Var::q(1)));
    CHECK_FALSE(e.depends_on(Var::q(0)));
    CHECK(e.index_bound(Var::Kind::Q) == 2);
    CHECK(e.index_bound(Var::Kind::V) == 1);
  }
}
