#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fracnoether/el.hpp"
#include "fracnoether/integrate.hpp"

namespace fracnoether {

struct AlphaSweep {
  double from = 0.0;
  double to = 1.0;
  std::size_t count = 2;

  /// Evenly spaced values, endpoints included, in ascending order.
  std::vector<double> values() const;
};

struct GeneratorSpec {
  std::string label;
  std::string tau;
  std::vector<std::string> xi;
  std::string gauge = "auto";  // "auto" or an expression over theta, q, v, alpha, t
};

enum class SolveMode { Ivp, Bvp };

/// One batch job, as read from a scenario file. Expressions stay textual here; they are parsed
/// during validation and again when a run is resolved for a concrete alpha.
struct Scenario {
  std::string name;
  std::size_t n = 1;
  std::string lagrangian;
  std::variant<double, AlphaSweep> alpha = 1.0;
  double observer_time = 2.0;
  Interval interval;
  SolveMode mode = SolveMode::Ivp;
  std::vector<double> q0, v0;  // IVP
  std::vector<double> qa, qb;  // BVP
  std::size_t steps = 1000;
  ShootingOptions shooting;
  std::vector<GeneratorSpec> generators;
  std::vector<std::string> charges;  // subset of {noether, energy, momentum}
  std::filesystem::path output_dir = ".";

  bool is_sweep() const noexcept { return std::holds_alternative<AlphaSweep>(alpha); }
  /// Scalar alpha, or every sweep value.
  std::vector<double> alpha_values() const;
  nlohmann::json to_json() const;
};

/// Reads and fully validates; throws ValidationError (nothing is computed or written).
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Re-checks every invariant, including that all expressions parse for every alpha value.
void validate(const Scenario& s);

}  // namespace fracnoether
