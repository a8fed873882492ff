#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fracnoether/error.hpp"
#include "fracnoether/pipeline.hpp"
#include "fracnoether/scenario.hpp"

using namespace fracnoether;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracnoether_tests_" + name);
  fs::remove_all(dir);
  return dir;
}

json base_doc() {
  return json::parse(R"({
    "name": "case", "n": 1, "lagrangian": "v0^2/2", "alpha": 0.5, "observer_time": 2.0,
    "interval": [0.0, 1.0], "mode": {"type": "ivp", "q0": [0.0], "v0": [1.0]}, "steps": 200
  })");
}

std::string validation_message(const json& doc) {
  try {
    (void)scenario_from_json(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Scenario load_example(const std::string& file, const fs::path& out) {
  Scenario s = load_scenario(fs::path(FRACNOETHER_SCENARIOS) / file);
  s.output_dir = out;
  return s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FRACNOETHER_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("scenario validation messages") {
    json doc = base_doc();
    CHECK_NOTHROW((void)scenario_from_json(doc));

    doc["alpha"] = 1.5;
    CHECK(validation_message(doc).find("alpha must lie in (0,1]") != std::string::npos);
    doc = base_doc();
    doc["observer_time"] = 1.0;
    CHECK(validation_message(doc).find("observer time must exceed b") != std::string::npos);
    doc = base_doc();
    doc["steps"] = 201;
    CHECK(validation_message(doc).find("even") != std::string::npos);
    doc = base_doc();
    doc["lagrangian"] = "v1^2";
    CHECK(validation_message(doc).find("out of range") != std::string::npos);
    doc = base_doc();
    doc["charges"] = {"noether"};
    CHECK(validation_message(doc).find("without generators") != std::string::npos);
    doc = base_doc();
    doc["charges"] = {"entropy"};
    CHECK(validation_message(doc).find("unknown charge") != std::string::npos);
    doc = base_doc();
    doc["alpha"] = {{"from", 0.2}, {"to", 1.0}, {"count", 1}};
    CHECK(validation_message(doc).find("count") != std::string::npos);
    doc = base_doc();
    doc["generators"] = json::array({{{"label", "a"}, {"tau", "1"}, {"xi", {"0"}}},
                                     {{"label", "a"}, {"tau", "0"}, {"xi", {"1"}}}});
    CHECK(validation_message(doc).find("duplicate label") != std::string::npos);
    doc = base_doc();
    doc["generators"] = json::array({{{"tau", "1"}, {"xi", {"0"}}, {"gauge", "(1 - alpha)/(t - theta)*v0^2"}}});
    CHECK(validation_message(doc).empty());
    doc.erase("mode");
    CHECK(validation_message(doc).find("missing field 'mode'") != std::string::npos);
  }

  TEST_CASE("scenario JSON echo round-trips") {
    const Scenario s = load_example("free_particle_bvp.json", "out");
    const Scenario again = scenario_from_json(s.to_json());
    CHECK(again.to_json() == s.to_json());
    CHECK(again.generators.size() == 2);
    CHECK(again.mode == SolveMode::Bvp);
  }

  TEST_CASE("solve writes trajectory and manifest") {
    const fs::path out = scratch("solve");
    const Scenario s = load_example("free_particle_bvp.json", out);
    std::ostringstream o, e;
    REQUIRE(cmd_solve(s, o, e) == exit_code::kSuccess);
    const auto rows = lines_of(out / "free_particle_bvp_traj.csv");
    REQUIRE(rows.size() == s.steps + 2);
    CHECK(rows.front().rfind("theta,q0,v0", 0) == 0);

    std::ifstream in(out / "free_particle_bvp_manifest.json");
    const json manifest = json::parse(in);
    CHECK(manifest["converged"] == true);
    CHECK(manifest["scenario"]["name"] == "free_particle_bvp");
    CHECK(manifest.contains("wall_time_seconds"));
    const double v0 = manifest["shooting"]["initial_velocity"][0];
    CHECK(std::fabs(v0 - 1.1601886205085204) < 1e-8);
  }

  TEST_CASE("non-converging shooting is a solver error") {
    const fs::path out = scratch("shooting");
    Scenario s = load_example("free_particle_bvp.json", out);
    s.shooting.max_iter = 0;
    std::ostringstream o, e;
    CHECK(cmd_solve(s, o, e) == exit_code::kSolver);
    CHECK(e.str().find("boundary miss") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "free_particle_bvp_traj.csv"));
  }

  TEST_CASE("charge writes one file per charge and flags preconditions") {
    const fs::path out = scratch("charge");
    const Scenario s = load_example("oscillator_energy.json", out);
    std::ostringstream o, e;
    // momentum is not conserved for the oscillator: its precondition fails
    CHECK(cmd_charge(s, o, e) == exit_code::kFailure);
    CHECK(o.str().find("precondition failed") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "oscillator_energy_charge_momentum_0.csv"));

    for (const char* label : {"energy", "noether_time"}) {
      const auto rows = lines_of(out / (std::string("oscillator_energy_charge_") + label + ".csv"));
      REQUIRE(rows.size() == s.steps + 3);
      CHECK(rows.front() == "theta,value");
      const std::string& tail = rows.back();
      REQUIRE(tail.rfind("# drift=", 0) == 0);
      CHECK(std::stod(tail.substr(8)) < 1e-7);
    }
  }

  TEST_CASE("null generator gives an identically zero charge") {
    const fs::path out = scratch("null");
    json doc = base_doc();
    doc["generators"] = json::array({{{"label", "null"}, {"tau", "0"}, {"xi", {"0"}}}});
    doc["charges"] = {"noether"};
    Scenario s = scenario_from_json(doc);
    s.output_dir = out;
    std::ostringstream o, e;
    REQUIRE(cmd_charge(s, o, e) == exit_code::kSuccess);
    const auto rows = lines_of(out / "case_charge_noether_null.csv");
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) CHECK(rows[k].substr(rows[k].find(',') + 1) == "0");
  }

  TEST_CASE("wrong gauge is detected by drift") {
    const fs::path out = scratch("gauge");
    const Scenario s = load_example("wrong_gauge.json", out);
    const ResolvedRun run = resolve(s, 0.6);
    const SolveOutcome solved = run_solve(s, run);
    for (const auto& c : evaluate_charges(s, run, solved.trajectory)) {
      REQUIRE(c.series);
      if (c.label == "noether_auto") CHECK(c.series->drift < 1e-9);
      if (c.label == "noether_shifted") CHECK(std::fabs(c.series->drift - 0.1) < 1e-3);
    }
  }

  TEST_CASE("sweep is deterministic across job counts") {
    const Scenario s = load_example("free_particle_sweep.json", scratch("sweep"));
    const auto serial = run_sweep(s, 1);
    const auto parallel = run_sweep(s, 4);
    std::ostringstream a, b;
    write_sweep_csv(a, serial);
    write_sweep_csv(b, parallel);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("alpha,label,status,drift,relative_drift,action\n", 0) == 0);

    // fractional charges hold at every alpha; the classical energy drifts unless alpha = 1
    for (const auto& row : serial) {
      CHECK(row.status == "ok");
      if (row.label == "energy" || row.label == "momentum_0") CHECK(row.drift < 1e-9);
      if (row.label == "classical_energy" && row.alpha < 1.0) CHECK(row.drift > 0.1);
      if (row.label == "classical_energy" && row.alpha == 1.0) CHECK(row.drift < 1e-12);
    }
    CHECK(serial.size() == 4 * 4);
  }

  TEST_CASE("sweep command writes the long-format CSV") {
    const fs::path out = scratch("sweep_cmd");
    const Scenario s = load_example("free_particle_sweep.json", out);
    std::ostringstream o, e;
    REQUIRE(cmd_sweep(s, CommandOptions{2}, o, e) == exit_code::kSuccess);
    CHECK(lines_of(out / "free_particle_sweep_sweep.csv").size() == 1 + 16);
  }

  TEST_CASE("command-line exit codes") {
    const fs::path out = scratch("cli");
    fs::create_directories(out);
    json doc = base_doc();
    doc["alpha"] = 1.5;
    doc["output_dir"] = (out / "bad").string();
    std::ofstream(out / "bad.json") << doc.dump();
    CHECK(run_cli("solve --scenario \"" + (out / "bad.json").string() + "\"") == exit_code::kValidation);
    CHECK_FALSE(fs::exists(out / "bad"));

    const std::string good = (fs::path(FRACNOETHER_SCENARIOS) / "free_particle_bvp.json").string();
    CHECK(run_cli("solve --scenario \"" + good + "\" --output \"" + (out / "good").string() + "\"") ==
          exit_code::kSuccess);
    CHECK(fs::exists(out / "good" / "free_particle_bvp_traj.csv"));
    CHECK(run_cli("solve --scenario \"" + good + "\" --steps 7") == exit_code::kValidation);
    CHECK(run_cli("bogus") == exit_code::kValidation);
  }
}
