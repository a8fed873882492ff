#include "fracnoether/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fracnoether/error.hpp"
#include "fracnoether/noether.hpp"

namespace fracnoether {

using nlohmann::json;

std::vector<double> AlphaSweep::values() const {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = i + 1 == count ? to : from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> Scenario::alpha_values() const {
  if (const auto* a = std::get_if<double>(&alpha)) return {*a};
  return std::get<AlphaSweep>(alpha).values();
}

json Scenario::to_json() const {
  json j;
  j["name"] = name;
  j["n"] = n;
  j["lagrangian"] = lagrangian;
  if (const auto* a = std::get_if<double>(&alpha)) {
    j["alpha"] = *a;
  } else {
    const auto& sw = std::get<AlphaSweep>(alpha);
    j["alpha"] = {{"from", sw.from}, {"to", sw.to}, {"count", sw.count}};
  }
  j["observer_time"] = observer_time;
  j["interval"] = {interval.a, interval.b};
  if (mode == SolveMode::Ivp) {
    j["mode"] = {{"type", "ivp"}, {"q0", q0}, {"v0", v0}};
  } else {
    j["mode"] = {{"type", "bvp"}, {"qa", qa}, {"qb", qb}};
  }
  j["steps"] = steps;
  j["shooting"] = {{"tol", shooting.tol}, {"max_iter", shooting.max_iter}};
  j["generators"] = json::array();
  for (const auto& g : generators) {
    j["generators"].push_back({{"label", g.label}, {"tau", g.tau}, {"xi", g.xi}, {"gauge", g.gauge}});
  }
  j["charges"] = charges;
  j["output_dir"] = output_dir.string();
  return j;
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) invalid(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) invalid(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(what + " must be finite");
  return x;
}

std::size_t count_value(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) invalid(what + " must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) invalid(what + " must be a string");
  return v.get<std::string>();
}

std::vector<double> vector_of(const json& v, const std::string& what) {
  if (!v.is_array()) invalid(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, what));
  return out;
}

void parse_checked(const std::string& source, std::size_t n, const std::string& what,
                   const std::map<std::string, double>& constants = {}) {
  try {
    (void)parse(source, n, constants);
  } catch (const ParseError& e) {
    invalid(what + ": " + e.what());
  }
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) invalid("scenario must be an object");
  Scenario s;
  s.name = text(require(doc, "name", "scenario"), "name");
  s.n = count_value(require(doc, "n", "scenario"), "n");
  s.lagrangian = text(require(doc, "lagrangian", "scenario"), "lagrangian");

  const json& alpha = require(doc, "alpha", "scenario");
  if (alpha.is_object()) {
    AlphaSweep sw;
    sw.from = number(require(alpha, "from", "alpha"), "alpha.from");
    sw.to = number(require(alpha, "to", "alpha"), "alpha.to");
    sw.count = count_value(require(alpha, "count", "alpha"), "alpha.count");
    s.alpha = sw;
  } else {
    s.alpha = number(alpha, "alpha");
  }

  s.observer_time = number(require(doc, "observer_time", "scenario"), "observer_time");
  const std::vector<double> iv = vector_of(require(doc, "interval", "scenario"), "interval");
  if (iv.size() != 2) invalid("interval must be [a, b]");
  s.interval = {iv[0], iv[1]};

  const json& mode = require(doc, "mode", "scenario");
  const std::string type = text(require(mode, "type", "mode"), "mode.type");
  if (type == "ivp") {
    s.mode = SolveMode::Ivp;
    s.q0 = vector_of(require(mode, "q0", "mode"), "mode.q0");
    s.v0 = vector_of(require(mode, "v0", "mode"), "mode.v0");
  } else if (type == "bvp") {
    s.mode = SolveMode::Bvp;
    s.qa = vector_of(require(mode, "qa", "mode"), "mode.qa");
    s.qb = vector_of(require(mode, "qb", "mode"), "mode.qb");
  } else {
    invalid("mode.type must be \"ivp\" or \"bvp\"");
  }

  if (doc.contains("steps")) s.steps = count_value(doc.at("steps"), "steps");
  if (doc.contains("shooting")) {
    const json& sh = doc.at("shooting");
    if (sh.contains("tol")) s.shooting.tol = number(sh.at("tol"), "shooting.tol");
    if (sh.contains("max_iter")) s.shooting.max_iter = count_value(sh.at("max_iter"), "shooting.max_iter");
  }

  if (doc.contains("generators")) {
    const json& gens = doc.at("generators");
    if (!gens.is_array()) invalid("generators must be an array");
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const json& g = gens[k];
      const std::string where = "generators[" + std::to_string(k) + "]";
      GeneratorSpec spec;
      spec.label = g.contains("label") ? text(g.at("label"), where + ".label") : "g" + std::to_string(k);
      spec.tau = text(require(g, "tau", where), where + ".tau");
      const json& xi = require(g, "xi", where);
      if (!xi.is_array()) invalid(where + ".xi must be an array of expressions");
      for (const auto& x : xi) spec.xi.push_back(text(x, where + ".xi"));
      if (g.contains("gauge")) spec.gauge = text(g.at("gauge"), where + ".gauge");
      s.generators.push_back(std::move(spec));
    }
  }

  if (doc.contains("charges")) {
    const json& ch = doc.at("charges");
    if (!ch.is_array()) invalid("charges must be an array");
    for (const auto& c : ch) s.charges.push_back(text(c, "charges"));
  }
  if (doc.contains("output_dir")) s.output_dir = text(doc.at("output_dir"), "output_dir");

  validate(s);
  return s;
}

void validate(const Scenario& s) {
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) {
    invalid("name must be a non-empty file-name-safe string");
  }
  if (s.n == 0) invalid("n must be positive");
  if (!(s.interval.a < s.interval.b)) invalid("interval must satisfy a < b");

  if (const auto* sw = std::get_if<AlphaSweep>(&s.alpha)) {
    if (sw->count < 2) invalid("alpha sweep count must be at least 2");
  }
  for (double a : s.alpha_values()) {
    if (!(a > 0.0 && a <= 1.0)) invalid("alpha must lie in (0,1]");
  }
  if (!(s.observer_time > s.interval.b)) invalid("observer time must exceed b");

  if (s.steps < 2 || s.steps % 2 != 0) invalid("steps must be an even number >= 2");
  if (!(s.shooting.tol > 0.0)) invalid("shooting.tol must be positive");

  if (s.mode == SolveMode::Ivp) {
    if (s.q0.size() != s.n || s.v0.size() != s.n) invalid("mode.q0 and mode.v0 must have length n");
  } else {
    if (s.qa.size() != s.n || s.qb.size() != s.n) invalid("mode.qa and mode.qb must have length n");
  }

  parse_checked(s.lagrangian, s.n, "lagrangian");

  std::set<std::string> labels;
  for (const auto& g : s.generators) {
    const std::string where = "generator '" + g.label + "'";
    if (g.label.empty() || g.label.find_first_of(",/\\ ") != std::string::npos) {
      invalid(where + ": label must be non-empty without commas, slashes or spaces");
    }
    if (!labels.insert(g.label).second) invalid(where + ": duplicate label");
    if (g.xi.size() != s.n) invalid(where + ": xi must have n components");
    parse_checked(g.tau, s.n, where + " tau");
    for (const auto& x : g.xi) parse_checked(x, s.n, where + " xi");
    try {
      std::vector<Expr> xi;
      for (const auto& x : g.xi) xi.push_back(parse(x, s.n));
      (void)SymmetryGenerator::create(parse(g.tau, s.n), std::move(xi));
    } catch (const ValidationError& e) {
      invalid(where + ": " + e.what());
    }
    if (g.gauge != "auto") {
      for (double a : s.alpha_values()) {
        parse_checked(g.gauge, s.n, where + " gauge", {{"alpha", a}, {"t", s.observer_time}});
      }
    }
  }

  static const std::set<std::string> known = {"noether", "energy", "momentum"};
  std::set<std::string> seen;
  for (const auto& c : s.charges) {
    if (!known.contains(c)) invalid("unknown charge '" + c + "' (expected noether, energy or momentum)");
    if (!seen.insert(c).second) invalid("charge '" + c + "' listed twice");
  }
  if (seen.contains("noether") && s.generators.empty()) invalid("noether charge requested without generators");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario file " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace fracnoether
