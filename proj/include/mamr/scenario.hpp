// Copyright 2026 The MAMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scenario files: robot, simulation, controller and fuzzy-system settings plus
// the list of runs, stored as JSON. Parsing is strict (unknown keys and wrong
// types are errors naming the dotted path of the field) and every omitted
// field keeps its built-in default, so `to_json(parse(...))` is a complete,
// reviewable description of what was simulated.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mamr/errors.hpp"
#include "mamr/fuzzy.hpp"
#include "mamr/parking_controller.hpp"
#include "mamr/simulator.hpp"

namespace mamr {

using json = nlohmann::ordered_json;

struct RunEntry {
  std::string name;
  RunSpec spec;
  std::optional<SensorNoise> noise;     // replaces sim.noise for this run
  std::optional<double> duration_max;   // replaces sim.duration_max

  friend bool operator==(const RunEntry& a, const RunEntry& b) {
    return a.name == b.name && a.spec.start == b.spec.start && a.spec.target == b.spec.target &&
           a.spec.mode == b.spec.mode && a.spec.beta == b.spec.beta && a.noise == b.noise &&
           a.duration_max == b.duration_max;
  }
};

/// Grid over initial lateral offset and heading sharing one target.
struct SweepSpec {
  std::vector<double> y0;      // m
  std::vector<double> theta0;  // deg
  double x0 = 0.0;
  Target target{7.0, 0.0, 0.0};
  ParkingMode mode = ParkingMode::full_parking;
  double beta = 0.0;
  bool mirror = false;  // also run every cell reflected through the x axis
  std::optional<double> duration_max;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct Scenario {
  RobotParams robot;
  SimConfig sim;
  ControllerConfig controller;
  std::vector<RunEntry> runs;
  std::optional<SweepSpec> sweep;
};

inline std::string sweep_run_name(double y0, double theta0, bool mirrored) {
  std::ostringstream os;
  os << "sweep_y" << y0 << "_th" << theta0;
  if (mirrored) os << "_mirror";
  return os.str();
}

/// Runs of the grid in row-major order (y0 outer, theta0 inner). With
/// `mirror` each cell is followed by its reflection (y0, theta0 negated).
inline std::vector<RunEntry> expand_sweep(const SweepSpec& s) {
  std::vector<RunEntry> out;
  for (double y : s.y0) {
    for (double th : s.theta0) {
      RunEntry e;
      e.name = sweep_run_name(y, th, false);
      e.spec = {{s.x0, y, th}, s.target, s.mode, s.beta};
      e.duration_max = s.duration_max;
      out.push_back(e);
      if (s.mirror) {
        RunEntry m = e;
        m.name = sweep_run_name(y, th, true);
        m.spec.start = {s.x0, -y, -th};
        m.spec.target.y = -s.target.y;
        m.spec.target.theta = -s.target.theta;
        out.push_back(m);
      }
    }
  }
  return out;
}

/// Explicit runs followed by the expanded sweep, if any.
inline std::vector<RunEntry> all_runs(const Scenario& s) {
  std::vector<RunEntry> out = s.runs;
  if (s.sweep) {
    const auto grid = expand_sweep(*s.sweep);
    out.insert(out.end(), grid.begin(), grid.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization

inline const char* to_string(ParkingMode m) {
  return m == ParkingMode::flc_only ? "flc_only" : "full_parking";
}

inline const char* to_string(Integrator i) {
  return i == Integrator::rk4 ? "rk4" : "semi_implicit_euler";
}

inline const char* to_string(fuzzy::MembershipKind k) {
  switch (k) {
    case fuzzy::MembershipKind::sigma_z: return "sigma_z";
    case fuzzy::MembershipKind::gaussian: return "gaussian";
    case fuzzy::MembershipKind::sigma_s: return "sigma_s";
  }
  return "?";
}

namespace detail {

inline json to_json(const fuzzy::MembershipFunction& m) {
  return {{"kind", to_string(m.kind)}, {"center", m.center}, {"width", m.width}};
}

inline json to_json(const fuzzy::Universe& u) {
  return {{"lower", u.lower}, {"upper", u.upper}, {"samples", u.samples}};
}

inline json to_json(const fuzzy::InputVariable& v) {
  return {{"universe", to_json(v.universe)},
          {"N", to_json(v.term(fuzzy::Term::N))},
          {"Z", to_json(v.term(fuzzy::Term::Z))},
          {"P", to_json(v.term(fuzzy::Term::P))}};
}

inline json to_json(const SensorNoise& n) { return {{"x", n.x}, {"y", n.y}, {"theta", n.theta}}; }

inline json to_json(const Target& t) {
  json j;
  j["x"] = t.x ? json(*t.x) : json("free");
  j["y"] = t.y;
  j["theta"] = t.theta;
  return j;
}

inline json to_json(const Configuration& c) { return {{"x", c.x}, {"y", c.y}, {"theta", c.theta}}; }

}  // namespace detail

inline json to_json(const RobotParams& p) {
  return {{"mass", p.mass},
          {"inertia", p.inertia},
          {"gravity", p.gravity},
          {"mu_k", p.mu_k},
          {"brake_x", p.brake_x},
          {"brake_y", p.brake_y},
          {"slip_epsilon", p.slip_epsilon},
          {"drive_force_limit", p.drive_force_limit}};
}

inline json to_json(const SimConfig& s) {
  return {{"dt_physics", s.dt_physics},     {"control_period", s.control_period},
          {"duration_max", s.duration_max}, {"integrator", to_string(s.integrator)},
          {"noise", detail::to_json(s.noise)}, {"seed", s.seed}};
}

inline json to_json(const fuzzy::FisDefinition& f) {
  return {{"e_theta", detail::to_json(f.e_theta)},
          {"e_y", detail::to_json(f.e_y)},
          {"e_theta_dot", detail::to_json(f.e_theta_dot)},
          {"output",
           {{"universe", detail::to_json(f.output.universe)},
            {"N", detail::to_json(f.output.negative)},
            {"P", detail::to_json(f.output.positive)}}},
          {"rules", f.rules.rows()},
          {"dead_band", f.dead_band}};
}

/// Controller settings without the fuzzy system, which has its own section.
inline json to_json(const ControllerConfig& c) {
  return {{"align_drive_force", c.align_drive_force},
          {"k_p", c.k_p},
          {"saturation_force", c.saturation_force},
          {"min_force", c.min_force},
          {"tol_y", c.tol_y},
          {"tol_theta", c.tol_theta},
          {"tol_x", c.tol_x},
          {"hold_time", c.hold_time},
          {"reentry_guard", c.reentry_guard},
          {"guard_engage", c.guard_engage},
          {"guard_release", c.guard_release},
          {"arrival_brake", c.arrival_brake},
          {"brake_deceleration", c.brake_deceleration}};
}

inline json to_json(const RunEntry& r) {
  json j = {{"name", r.name},
            {"start", detail::to_json(r.spec.start)},
            {"target", detail::to_json(r.spec.target)},
            {"mode", to_string(r.spec.mode)},
            {"beta", r.spec.beta}};
  if (r.noise) j["noise"] = detail::to_json(*r.noise);
  if (r.duration_max) j["duration_max"] = *r.duration_max;
  return j;
}

inline json to_json(const SweepSpec& s) {
  json j = {{"y0", s.y0},     {"theta0", s.theta0},
            {"x0", s.x0},     {"target", detail::to_json(s.target)},
            {"mode", to_string(s.mode)}, {"beta", s.beta},
            {"mirror", s.mirror}};
  if (s.duration_max) j["duration_max"] = *s.duration_max;
  return j;
}

inline json to_json(const Scenario& s) {
  json j = {{"robot", to_json(s.robot)},
            {"sim", to_json(s.sim)},
            {"controller", to_json(s.controller)},
            {"fis", to_json(s.controller.fis)}};
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  j["runs"] = runs;
  if (s.sweep) j["sweep"] = to_json(*s.sweep);
  return j;
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Reads the members of one JSON object, remembering which keys were used so
/// that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return join(path_, key); }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, field(key));
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <typename Unsigned>
  void count(const std::string& key, Unsigned& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned())
        throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<Unsigned>();
    }
  }

  void pair(const std::string& key, std::array<double, 2>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2)
        throw ConfigError(field(key), "expected an array of two numbers");
      for (std::size_t i = 0; i < 2; ++i)
        out[i] = as_number((*v)[i], field(key) + "[" + std::to_string(i) + "]");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where, "must be finite");
    return d;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where, "expected a string");
  return v.get<std::string>();
}

inline ParkingMode parse_mode(const json& v, const std::string& where) {
  const std::string s = as_string(v, where);
  if (s == "flc_only") return ParkingMode::flc_only;
  if (s == "full_parking") return ParkingMode::full_parking;
  throw ConfigError(where, "expected \"flc_only\" or \"full_parking\", got \"" + s + "\"");
}

inline fuzzy::MembershipFunction parse_membership(const json& j, const std::string& path,
                                                  fuzzy::MembershipFunction m) {
  ObjectReader r(j, path);
  if (const json* k = r.find("kind")) {
    const std::string s = as_string(*k, r.field("kind"));
    if (s == "sigma_z") m.kind = fuzzy::MembershipKind::sigma_z;
    else if (s == "gaussian") m.kind = fuzzy::MembershipKind::gaussian;
    else if (s == "sigma_s") m.kind = fuzzy::MembershipKind::sigma_s;
    else throw ConfigError(r.field("kind"), "unknown membership kind \"" + s + "\"");
  }
  r.number("center", m.center);
  r.number("width", m.width);
  r.finish();
  return m;
}

inline fuzzy::Universe parse_universe(const json& j, const std::string& path, fuzzy::Universe u) {
  ObjectReader r(j, path);
  r.number("lower", u.lower);
  r.number("upper", u.upper);
  r.count("samples", u.samples);
  r.finish();
  return u;
}

inline fuzzy::InputVariable parse_input(const json& j, const std::string& path,
                                        fuzzy::InputVariable v) {
  ObjectReader r(j, path);
  if (const json* u = r.find("universe")) v.universe = parse_universe(*u, r.field("universe"), v.universe);
  for (fuzzy::Term t : fuzzy::kTerms) {
    const std::string key(1, fuzzy::to_char(t));
    if (const json* m = r.find(key))
      v.terms[fuzzy::index(t)] = parse_membership(*m, r.field(key), v.terms[fuzzy::index(t)]);
  }
  r.finish();
  return v;
}

inline Configuration parse_configuration(const json& j, const std::string& path, Configuration c) {
  ObjectReader r(j, path);
  r.number("x", c.x);
  r.number("y", c.y);
  r.number("theta", c.theta);
  r.finish();
  return c;
}

inline Target parse_target(const json& j, const std::string& path, Target t) {
  ObjectReader r(j, path);
  if (const json* x = r.find("x")) {
    if (x->is_string()) {
      if (x->get<std::string>() != "free")
        throw ConfigError(r.field("x"), "expected a number or \"free\"");
      t.x.reset();
    } else {
      t.x = ObjectReader::as_number(*x, r.field("x"));
    }
  }
  r.number("y", t.y);
  r.number("theta", t.theta);
  r.finish();
  return t;
}

inline SensorNoise parse_noise(const json& j, const std::string& path, SensorNoise n) {
  ObjectReader r(j, path);
  r.number("x", n.x);
  r.number("y", n.y);
  r.number("theta", n.theta);
  r.finish();
  if (n.x < 0.0 || n.y < 0.0 || n.theta < 0.0)
    throw ConfigError(path, "noise standard deviations must be >= 0");
  return n;
}

inline std::vector<double> parse_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(ObjectReader::as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void parse_robot(const json& j, RobotParams& p) {
  ObjectReader r(j, "robot");
  r.number("mass", p.mass);
  r.number("inertia", p.inertia);
  r.number("gravity", p.gravity);
  r.pair("mu_k", p.mu_k);
  r.number("brake_x", p.brake_x);
  r.pair("brake_y", p.brake_y);
  r.number("slip_epsilon", p.slip_epsilon);
  r.number("drive_force_limit", p.drive_force_limit);
  r.finish();
}

inline void parse_sim(const json& j, SimConfig& s) {
  ObjectReader r(j, "sim");
  r.number("dt_physics", s.dt_physics);
  r.number("control_period", s.control_period);
  r.number("duration_max", s.duration_max);
  if (const json* v = r.find("integrator")) {
    const std::string name = as_string(*v, "sim.integrator");
    if (name == "rk4") s.integrator = Integrator::rk4;
    else if (name == "semi_implicit_euler") s.integrator = Integrator::semi_implicit_euler;
    else throw ConfigError("sim.integrator", "expected \"rk4\" or \"semi_implicit_euler\"");
  }
  if (const json* v = r.find("noise")) s.noise = parse_noise(*v, "sim.noise", s.noise);
  r.count("seed", s.seed);
  r.finish();
}

inline void parse_controller(const json& j, ControllerConfig& c) {
  ObjectReader r(j, "controller");
  r.number("align_drive_force", c.align_drive_force);
  r.number("k_p", c.k_p);
  r.number("saturation_force", c.saturation_force);
  r.number("min_force", c.min_force);
  r.number("tol_y", c.tol_y);
  r.number("tol_theta", c.tol_theta);
  r.number("tol_x", c.tol_x);
  r.number("hold_time", c.hold_time);
  r.boolean("reentry_guard", c.reentry_guard);
  r.number("guard_engage", c.guard_engage);
  r.number("guard_release", c.guard_release);
  r.boolean("arrival_brake", c.arrival_brake);
  r.number("brake_deceleration", c.brake_deceleration);
  r.finish();
}

inline void parse_fis(const json& j, fuzzy::FisDefinition& f) {
  ObjectReader r(j, "fis");
  if (const json* v = r.find("e_theta")) f.e_theta = parse_input(*v, "fis.e_theta", f.e_theta);
  if (const json* v = r.find("e_y")) f.e_y = parse_input(*v, "fis.e_y", f.e_y);
  if (const json* v = r.find("e_theta_dot"))
    f.e_theta_dot = parse_input(*v, "fis.e_theta_dot", f.e_theta_dot);
  if (const json* v = r.find("output")) {
    ObjectReader o(*v, "fis.output");
    if (const json* u = o.find("universe"))
      f.output.universe = parse_universe(*u, "fis.output.universe", f.output.universe);
    if (const json* m = o.find("N")) f.output.negative = parse_membership(*m, "fis.output.N", f.output.negative);
    if (const json* m = o.find("P")) f.output.positive = parse_membership(*m, "fis.output.P", f.output.positive);
    o.finish();
  }
  if (const json* v = r.find("rules")) {
    if (!v->is_array() || v->size() != 9)
      throw ConfigError("fis.rules", "expected 9 strings (e_y blocks N, Z, P of e_theta rows N, Z, P)");
    std::array<std::string, 9> rows;
    for (std::size_t i = 0; i < 9; ++i) rows[i] = as_string((*v)[i], "fis.rules[" + std::to_string(i) + "]");
    std::array<std::string_view, 9> views;
    for (std::size_t i = 0; i < 9; ++i) views[i] = rows[i];
    try {
      f.rules = fuzzy::RuleBase::from_rows(views);
    } catch (const InputDomainError& e) {
      throw ConfigError("fis.rules", e.what());
    }
  }
  r.number("dead_band", f.dead_band);
  r.finish();
}

inline RunEntry parse_run(const json& j, const std::string& path, std::size_t index) {
  ObjectReader r(j, path);
  RunEntry e;
  e.name = "run" + std::to_string(index);
  if (const json* v = r.find("name")) e.name = as_string(*v, r.field("name"));
  const json* start = r.find("start");
  if (!start) throw ConfigError(r.field("start"), "missing");
  e.spec.start = parse_configuration(*start, r.field("start"), {});
  if (const json* v = r.find("mode")) e.spec.mode = parse_mode(*v, r.field("mode"));
  if (const json* v = r.find("target")) e.spec.target = parse_target(*v, r.field("target"), {});
  if (e.spec.mode == ParkingMode::full_parking && !e.spec.target.x)
    throw ConfigError(r.field("target.x"), "full_parking needs a numeric target x");
  if (e.spec.mode == ParkingMode::flc_only) e.spec.target.x.reset();
  r.number("beta", e.spec.beta);
  if (const json* v = r.find("noise")) e.noise = parse_noise(*v, r.field("noise"), {});
  if (const json* v = r.find("duration_max")) {
    e.duration_max = ObjectReader::as_number(*v, r.field("duration_max"));
    if (*e.duration_max <= 0.0) throw ConfigError(r.field("duration_max"), "must be > 0");
  }
  r.finish();
  return e;
}

inline SweepSpec parse_sweep(const json& j) {
  ObjectReader r(j, "sweep");
  SweepSpec s;
  if (const json* v = r.find("y0")) s.y0 = parse_numbers(*v, "sweep.y0");
  if (const json* v = r.find("theta0")) s.theta0 = parse_numbers(*v, "sweep.theta0");
  r.number("x0", s.x0);
  if (const json* v = r.find("target")) s.target = parse_target(*v, "sweep.target", s.target);
  if (const json* v = r.find("mode")) s.mode = parse_mode(*v, "sweep.mode");
  if (s.mode == ParkingMode::full_parking && !s.target.x)
    throw ConfigError("sweep.target.x", "full_parking needs a numeric target x");
  if (s.mode == ParkingMode::flc_only) s.target.x.reset();
  r.number("beta", s.beta);
  r.boolean("mirror", s.mirror);
  if (const json* v = r.find("duration_max")) {
    s.duration_max = ObjectReader::as_number(*v, "sweep.duration_max");
    if (*s.duration_max <= 0.0) throw ConfigError("sweep.duration_max", "must be > 0");
  }
  r.finish();
  return s;
}

// Runs a library validate() and reports its complaint against `section`.
template <typename F>
void validated(const char* section, F&& f) {
  try {
    f();
  } catch (const InputDomainError& e) {
    throw ConfigError(section, e.what());
  }
}

}  // namespace detail

/// Builds a scenario from a parsed document. Omitted fields keep their
/// defaults; unknown keys, wrong types and invalid values throw ConfigError.
inline Scenario scenario_from_json(const json& doc) {
  detail::ObjectReader top(doc, "");
  Scenario s;
  if (const json* v = top.find("robot")) detail::parse_robot(*v, s.robot);
  if (const json* v = top.find("sim")) detail::parse_sim(*v, s.sim);
  if (const json* v = top.find("controller")) detail::parse_controller(*v, s.controller);
  if (const json* v = top.find("fis")) detail::parse_fis(*v, s.controller.fis);
  if (const json* v = top.find("runs")) {
    if (!v->is_array()) throw ConfigError("runs", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i)
      s.runs.push_back(detail::parse_run((*v)[i], "runs[" + std::to_string(i) + "]", i));
  }
  if (const json* v = top.find("sweep")) s.sweep = detail::parse_sweep(*v);
  top.finish();

  detail::validated("robot", [&] { s.robot.validate(); });
  detail::validated("sim", [&] { s.sim.validate(); });
  detail::validated("fis", [&] { s.controller.fis.validate(); });
  detail::validated("controller", [&] { s.controller.validate(); });
  if (s.controller.saturation_force > s.robot.drive_force_limit)
    throw ConfigError("controller.saturation_force", "exceeds robot.drive_force_limit");
  return s;
}

/// Parses JSON text; syntax errors report line and column.
inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Applies `path=value` to a document. `value` is read as JSON when it parses
/// (numbers, true/false, quoted strings, arrays) and as a bare string
/// otherwise. Numeric path segments index arrays.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("", "override \"" + assignment + "\" is not of the form path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ConfigError(path, "empty path segment");
    const bool index = key.find_first_not_of("0123456789") == std::string::npos;
    if (index && node->is_array()) {
      const std::size_t i = std::stoul(key);
      if (i >= node->size()) throw ConfigError(path, "index out of range");
      node = &(*node)[i];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError(path, "cannot descend into a non-object");
      node = &(*node)[key];
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  *node = value;
}

/// Loads a scenario with the precedence command line > file > default.
inline Scenario load_scenario(const std::optional<std::string>& path,
                              const std::vector<std::string>& overrides = {}) {
  json doc = path ? parse_document(read_text_file(*path)) : json::object();
  for (const auto& o : overrides) apply_override(doc, o);
  return scenario_from_json(doc);
}

}  // namespace mamr
