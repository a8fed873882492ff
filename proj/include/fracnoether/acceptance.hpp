#pragma once

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracnoether/expr.hpp"

namespace fracnoether {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string measured;  // human-readable measured values against thresholds
};

/// Runs the built-in acceptance corpus; each criterion is self-contained and never throws.
std::vector<CriterionResult> run_acceptance();

nlohmann::json to_json(const std::vector<CriterionResult>& results);

/// Random, everywhere-smooth expression over theta, q, v (arguments of ln/sqrt/division and real
/// powers are kept away from zero). Used by the derivative-engine checks.
Expr random_smooth_expression(std::mt19937_64& rng, std::size_t n, int depth);

/// Centered finite difference of e in `var` at p with step h; uses eval only.
double central_difference(const Expr& e, const EvalPoint& p, Var var, double h = 1e-6);

}  // namespace fracnoether
