#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracnoether/el.hpp"
#include "fracnoether/error.hpp"
#include "fracnoether/integrate.hpp"
#include "fracnoether/noether.hpp"
#include "fracnoether/scenario.hpp"

namespace fracnoether {

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kFailure = 1;     // acceptance or charge failure
inline constexpr int kValidation = 2;
inline constexpr int kSolver = 3;
}  // namespace exit_code

/// A scenario bound to one alpha: assembled problem, generators with resolved gauge rates,
/// and every channel the requested charges need.
struct ResolvedRun {
  VariationalProblem problem;
  std::vector<std::string> generator_labels;
  std::vector<SymmetryGenerator> generators;
  Integrands integrands;
};

ResolvedRun resolve(const Scenario& s, double alpha);
std::string lambda_channel_name(const std::string& generator_label);

struct SolveOutcome {
  Trajectory trajectory;
  std::optional<ShootingReport> shooting;
};

/// IVP or shooting solve; throws SolverFailure when shooting does not converge.
SolveOutcome run_solve(const Scenario& s, const ResolvedRun& run);

class SolverFailure : public Error {
public:
  SolverFailure(const std::string& msg, ShootingReport report) : Error(msg), report_(std::move(report)) {}
  const ShootingReport& report() const noexcept { return report_; }

private:
  ShootingReport report_;
};

struct ChargeOutcome {
  std::string label;
  std::optional<ChargeSeries> series;
  std::string error;  // precondition failure message when series is empty
};

/// Evaluates every requested charge; per-charge precondition failures are captured, not thrown.
/// With `include_classical`, uncorrected classical energy/momentum accompany the fractional ones.
std::vector<ChargeOutcome> evaluate_charges(const Scenario& s, const ResolvedRun& run, const Trajectory& traj,
                                            bool include_classical = false);

struct CommandOptions {
  std::size_t jobs = 1;
};

/// CLI command bodies. Each returns an exit code; diagnostics go to `err`.
int cmd_solve(const Scenario& s, std::ostream& out, std::ostream& err);
int cmd_charge(const Scenario& s, std::ostream& out, std::ostream& err);
int cmd_sweep(const Scenario& s, const CommandOptions& opts, std::ostream& out, std::ostream& err);

struct SweepRow {
  double alpha = 0.0;
  std::string label;
  std::string status = "ok";
  double drift = 0.0;
  double relative_drift = 0.0;
  double action = 0.0;
};

/// Sweep rows sorted by alpha then label; independent alpha points run on `jobs` threads.
std::vector<SweepRow> run_sweep(const Scenario& s, std::size_t jobs);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace fracnoether
