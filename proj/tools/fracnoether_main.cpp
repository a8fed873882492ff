// fracnoether: batch front-end for fractional Euler-Lagrange solves and Noether charge checks.
//
//   fracnoether solve  --scenario s.json [--output dir] [--steps N]
//   fracnoether charge --scenario s.json [--output dir] [--steps N]
//   fracnoether sweep  --scenario s.json [--output dir] [--steps N] [--jobs k]
//   fracnoether verify [--output dir]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "fracnoether/acceptance.hpp"
#include "fracnoether/error.hpp"
#include "fracnoether/pipeline.hpp"
#include "fracnoether/scenario.hpp"

namespace fn = fracnoether;

namespace {

struct Args {
  std::string scenario;
  std::string output;
  std::size_t steps = 0;
  std::size_t jobs = 0;
};

// Loads the scenario and applies command-line overrides; validation runs before anything is written.
fn::Scenario load(const Args& args) {
  fn::Scenario s = fn::load_scenario(args.scenario);
  if (!args.output.empty()) s.output_dir = args.output;
  if (args.steps != 0) s.steps = args.steps;
  fn::validate(s);
  return s;
}

int verify(const Args& args) {
  const auto results = fn::run_acceptance();
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  [" << std::setw(2) << r.id << "] " << r.title << "\n        "
              << r.measured << '\n';
    all = all && r.passed;
  }
  const nlohmann::json report = fn::to_json(results);
  if (args.output.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::filesystem::create_directories(args.output);
    std::ofstream(std::filesystem::path(args.output) / "verify_report.json") << report.dump(2) << '\n';
  }
  return all ? fn::exit_code::kSuccess : fn::exit_code::kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional action-like Euler-Lagrange solver and Noether charge checker"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", args.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", args.output, "Output directory (overrides output_dir)");
    cmd->add_option("--steps", args.steps, "Integration steps (overrides steps)");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve the scenario and write trajectory CSV + manifest");
  add_common(solve);
  CLI::App* charge = app.add_subcommand("charge", "Write one CSV per requested charge and print drift summary");
  add_common(charge);
  CLI::App* sweep = app.add_subcommand("sweep", "Run an alpha sweep and write a long-format CSV");
  add_common(sweep);
  sweep->add_option("--jobs", args.jobs, "Concurrent alpha points (default: hardware threads)");
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the built-in acceptance corpus");
  verify_cmd->add_option("--output", args.output, "Directory for verify_report.json (default: print JSON)");
  verify_cmd->add_option("--jobs", args.jobs, "Ignored; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fn::exit_code::kValidation;
  }

  if (verify_cmd->parsed()) return verify(args);

  fn::Scenario scenario;
  try {
    scenario = load(args);
  } catch (const fn::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return fn::exit_code::kValidation;
  }

  try {
    if (solve->parsed()) return fn::cmd_solve(scenario, std::cout, std::cerr);
    if (charge->parsed()) return fn::cmd_charge(scenario, std::cout, std::cerr);
    fn::CommandOptions opts;
    opts.jobs = args.jobs != 0 ? args.jobs : std::max(1u, std::thread::hardware_concurrency());
    return fn::cmd_sweep(scenario, opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fn::exit_code::kSolver;
  }
}
