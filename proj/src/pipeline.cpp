#include "fracnoether/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include "fracnoether/action.hpp"
#include "fracnoether/error.hpp"

namespace fracnoether {

namespace fs = std::filesystem;
using nlohmann::json;

std::string lambda_channel_name(const std::string& generator_label) { return "Lambda_" + generator_label; }

namespace {

bool wants(const Scenario& s, const char* charge) {
  return std::find(s.charges.begin(), s.charges.end(), charge) != s.charges.end();
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

json report_json(const ShootingReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"boundary_miss", r.boundary_miss},
          {"initial_velocity", r.initial_velocity}};
}

double scalar_alpha(const Scenario& s) {
  if (s.is_sweep()) throw ValidationError("an alpha sweep is only valid for the sweep command");
  return std::get<double>(s.alpha);
}

}  // namespace

ResolvedRun resolve(const Scenario& s, double alpha) {
  std::optional<BoundaryValues> boundary;
  if (s.mode == SolveMode::Bvp) boundary = BoundaryValues{s.qa, s.qb};
  VariationalProblem prob = VariationalProblem::create(s.n, parse(s.lagrangian, s.n), s.interval,
                                                       FractionalParams{alpha, s.observer_time}, boundary);
  ResolvedRun run{std::move(prob), {}, {}, {}};

  const std::map<std::string, double> constants = {{"alpha", alpha}, {"t", s.observer_time}};
  for (const auto& g : s.generators) {
    std::vector<Expr> xi;
    for (const auto& x : g.xi) xi.push_back(parse(x, s.n));
    SymmetryGenerator gen = SymmetryGenerator::create(parse(g.tau, s.n), std::move(xi));
    gen.gauge_rate = g.gauge == "auto" ? gauge_rate_from_reduced_condition(run.problem, gen)
                                       : parse(g.gauge, s.n, constants);
    if (wants(s, "noether")) run.integrands[lambda_channel_name(g.label)] = *gen.gauge_rate;
    run.generator_labels.push_back(g.label);
    run.generators.push_back(std::move(gen));
  }
  if (wants(s, "energy")) run.integrands["energy_correction"] = energy_correction_integrand(run.problem);
  if (wants(s, "momentum")) {
    for (std::size_t i = 0; i < s.n; ++i) {
      run.integrands[momentum_channel_name(i)] = momentum_correction_integrand(run.problem, i);
    }
  }
  return run;
}

SolveOutcome run_solve(const Scenario& s, const ResolvedRun& run) {
  SolveOutcome out;
  if (s.mode == SolveMode::Ivp) {
    out.trajectory = ivp_solve(to_explicit_ode(run.problem), s.interval, s.q0, s.v0, s.steps, run.integrands);
    return out;
  }
  ShootingResult shot = bvp_shoot(run.problem, s.steps, s.shooting, run.integrands);
  if (!shot.report.converged) {
    throw SolverFailure("shooting did not converge within " + std::to_string(s.shooting.max_iter) + " iterations",
                        shot.report);
  }
  out.trajectory = std::move(shot.trajectory);
  out.shooting = std::move(shot.report);
  return out;
}

std::vector<ChargeOutcome> evaluate_charges(const Scenario& s, const ResolvedRun& run, const Trajectory& traj,
                                            bool include_classical) {
  std::vector<ChargeOutcome> out;
  auto attempt = [&](std::string label, auto&& compute) {
    ChargeOutcome c;
    c.label = std::move(label);
    try {
      ChargeSeries series = compute();
      series.label = c.label;
      c.series = std::move(series);
    } catch (const PreconditionError& e) {
      c.error = e.what();
    } catch (const DomainError& e) {
      c.error = e.what();
    }
    out.push_back(std::move(c));
  };

  if (wants(s, "noether")) {
    for (std::size_t g = 0; g < run.generators.size(); ++g) {
      attempt("noether_" + run.generator_labels[g], [&] {
        return noether_charge(run.problem, run.generators[g], traj, lambda_channel_name(run.generator_labels[g]));
      });
    }
  }
  if (wants(s, "energy")) {
    attempt("energy", [&] { return fractional_energy(run.problem, traj); });
    if (include_classical) attempt("classical_energy", [&] { return classical_energy(run.problem, traj); });
  }
  if (wants(s, "momentum")) {
    for (std::size_t i = 0; i < s.n; ++i) {
      attempt("momentum_" + std::to_string(i), [&] { return fractional_momentum(run.problem, traj, i); });
      if (include_classical) {
        attempt("classical_momentum_" + std::to_string(i), [&] { return classical_momentum(run.problem, traj, i); });
      }
    }
  }
  return out;
}

int cmd_solve(const Scenario& s, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome solved;
  try {
    const ResolvedRun run = resolve(s, scalar_alpha(s));
    solved = run_solve(s, run);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return exit_code::kValidation;
  } catch (const SolverFailure& e) {
    err << "solver error: " << e.what() << " (boundary miss " << report_json(e.report()).dump() << ")\n";
    return exit_code::kSolver;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_code::kSolver;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(s.output_dir);
  const fs::path traj_path = s.output_dir / (s.name + "_traj.csv");
  {
    auto os = open_output(traj_path);
    write_trajectory_csv(os, solved.trajectory);
  }

  json manifest;
  manifest["scenario"] = s.to_json();
  manifest["solver"] = {{"method", "rk4"},
                        {"steps", s.steps},
                        {"shooting_tol", s.shooting.tol},
                        {"shooting_max_iter", s.shooting.max_iter}};
  manifest["converged"] = true;
  if (solved.shooting) manifest["shooting"] = report_json(*solved.shooting);
  manifest["trajectory_csv"] = traj_path.filename().string();
  manifest["wall_time_seconds"] = wall;
  {
    auto os = open_output(s.output_dir / (s.name + "_manifest.json"));
    os << std::setw(2) << manifest << '\n';
  }
  out << "wrote " << traj_path.string() << " (" << solved.trajectory.theta.size() << " rows)\n";
  return exit_code::kSuccess;
}

int cmd_charge(const Scenario& s, std::ostream& out, std::ostream& err) {
  if (s.charges.empty()) {
    err << "validation error: no charges requested\n";
    return exit_code::kValidation;
  }
  std::vector<ChargeOutcome> charges;
  try {
    const ResolvedRun run = resolve(s, scalar_alpha(s));
    const SolveOutcome solved = run_solve(s, run);
    charges = evaluate_charges(s, run, solved.trajectory);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return exit_code::kValidation;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_code::kSolver;
  }

  fs::create_directories(s.output_dir);
  int code = exit_code::kSuccess;
  out << std::left << std::setw(28) << "label" << std::setw(26) << "drift" << "relative_drift\n";
  for (const auto& c : charges) {
    if (!c.series) {
      out << std::setw(28) << c.label << "precondition failed: " << c.error << '\n';
      code = exit_code::kFailure;
      continue;
    }
    auto os = open_output(s.output_dir / (s.name + "_charge_" + c.label + ".csv"));
    write_charge_csv(os, *c.series);
    out << std::setw(28) << c.label << std::setw(26) << format_double(c.series->drift)
        << format_double(c.series->relative_drift) << '\n';
  }
  return code;
}

std::vector<SweepRow> run_sweep(const Scenario& s, std::size_t jobs) {
  const std::vector<double> alphas = s.alpha_values();
  std::vector<std::vector<SweepRow>> per_alpha(alphas.size());

  auto work = [&](std::size_t idx) {
    const double alpha = alphas[idx];
    std::vector<SweepRow>& rows = per_alpha[idx];
    try {
      const ResolvedRun run = resolve(s, alpha);
      const SolveOutcome solved = run_solve(s, run);
      const double action = fractional_action(run.problem, solved.trajectory).value;
      for (const auto& c : evaluate_charges(s, run, solved.trajectory, true)) {
        SweepRow row;
        row.alpha = alpha;
        row.label = c.label;
        row.action = action;
        if (c.series) {
          row.drift = c.series->drift;
          row.relative_drift = c.series->relative_drift;
        } else {
          row.status = "precondition_failed: " + one_line(c.error);
        }
        rows.push_back(std::move(row));
      }
      if (rows.empty()) rows.push_back(SweepRow{alpha, "action", "ok", 0.0, 0.0, action});
    } catch (const std::exception& e) {
      rows.push_back(SweepRow{alpha, "solve", "solver_error: " + one_line(e.what()), 0.0, 0.0, 0.0});
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, alphas.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < alphas.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < alphas.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<SweepRow> rows;
  for (auto& group : per_alpha) rows.insert(rows.end(), group.begin(), group.end());
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.alpha != y.alpha ? x.alpha < y.alpha : x.label < y.label;
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "alpha,label,status,drift,relative_drift,action\n";
  for (const auto& r : rows) {
    os << format_double(r.alpha) << ',' << r.label << ',' << r.status << ',';
    if (r.status == "ok") {
      os << format_double(r.drift) << ',' << format_double(r.relative_drift) << ',' << format_double(r.action);
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

int cmd_sweep(const Scenario& s, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  if (!s.is_sweep()) {
    err << "validation error: sweep requires alpha = {from, to, count}\n";
    return exit_code::kValidation;
  }
  const std::vector<SweepRow> rows = run_sweep(s, opts.jobs);

  fs::create_directories(s.output_dir);
  const fs::path path = s.output_dir / (s.name + "_sweep.csv");
  {
    auto os = open_output(path);
    write_sweep_csv(os, rows);
  }

  int code = exit_code::kSuccess;
  out << std::left << std::setw(12) << "alpha" << std::setw(28) << "label" << std::setw(26) << "relative_drift"
      << "status\n";
  for (const auto& r : rows) {
    out << std::setw(12) << format_double(r.alpha) << std::setw(28) << r.label << std::setw(26)
        << (r.status == "ok" ? format_double(r.relative_drift) : "-") << r.status << '\n';
    if (r.status != "ok") code = exit_code::kFailure;
  }
  out << "wrote " << path.string() << '\n';
  return code;
}

}  // namespace fracnoether
