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

// Acceptance checks AC1-AC8. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
//
// usage: mamr_acceptance <mamr executable> <scenario bundle>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "mamr/batch.hpp"
#include "mamr/export.hpp"
#include "mamr/scenario.hpp"

namespace fs = std::filesystem;
using namespace mamr;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (ok) return;
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const RobotParams kRobot{};

// ---------------------------------------------------------------------------

Verdict ac1() {
  Verdict v;
  SimConfig sim;
  sim.duration_max = 30.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = run_scenario(kRobot, sim, {},
                                {{0.0, 0.63, 0.0}, {std::nullopt, 0.0, 0.0}, ParkingMode::flc_only});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& s = log.summary;
  v.require(s.outcome == RunOutcome::done, "did not finish within 30 s");
  v.require(std::abs(s.final_pose.y) < 0.02 && std::abs(s.final_pose.theta) < 2.0,
            fmt("final y=%.4f theta=%.3f", s.final_pose.y, s.final_pose.theta));
  v.require(wall < 5.0, fmt("wall clock %.2f s", wall));
  if (v.pass)
    v.detail = fmt("parked after %.2f s (y=%.4f m, theta=%.3f deg), %.2f s wall",
                   *s.parking_time, s.final_pose.y, s.final_pose.theta, wall);
  return v;
}

Verdict ac2() {
  Verdict v;
  SimConfig sim;
  sim.duration_max = 40.0;
  const ControllerConfig c;
  const double x_d = 2.3;
  const auto log = run_scenario(kRobot, sim, c, {{-0.2, 0.6, 0.0}, {x_d, 0.0, 0.0}});
  const auto& s = log.summary;
  v.require(s.outcome == RunOutcome::done && s.converged, "did not converge within 40 s");
  v.require(std::abs(s.final_e_x) < 0.05 && std::abs(s.final_e_y) < 0.02 &&
                std::abs(s.final_e_theta) < 2.0,
            fmt("final errors x=%.4f y=%.4f theta=%.3f", s.final_e_x, s.final_e_y,
                s.final_e_theta));

  std::size_t align = 0, park = 0;
  ControllerPhase last = ControllerPhase::align;
  for (const LogRecord& r : log.records) {
    v.require(static_cast<int>(r.phase) >= static_cast<int>(last), "phase regressed");
    last = r.phase;
    if (r.phase == ControllerPhase::align) {
      ++align;
      v.require(r.input.drive_force == c.align_drive_force, "F_d not constant during ALIGN");
    } else if (r.phase == ControllerPhase::park_x) {
      ++park;
      const double e_x = x_d - r.state.x;
      if (std::abs(e_x) > c.tol_x) {
        const double law =
            std::copysign(std::clamp(c.k_p * std::abs(e_x), c.min_force, c.saturation_force), e_x);
        v.require(r.input.drive_force == law,
                  fmt("F_d=%.4f at e_x=%.4f is not the saturated/floored law", r.input.drive_force,
                      e_x));
      }
    }
  }
  v.require(align > 0 && park > 0, "log lacks one of the two phases");
  if (v.pass)
    v.detail = fmt("aligned at %.2f s, parked at %.2f s (e_x=%.4f, e_y=%.4f, e_theta=%.3f)",
                   *s.alignment_time, *s.parking_time, s.final_e_x, s.final_e_y, s.final_e_theta);
  return v;
}

Verdict ac3() {
  Verdict v;
  Scenario scenario;
  SweepSpec grid{{1.0, 1.5}, {0.0, -60.0, 60.0}};
  grid.mirror = true;
  grid.duration_max = 200.0;
  const auto runs = expand_sweep(grid);
  const auto results = run_batch(scenario, runs, workers());

  double worst = 0.0, slowest = 0.0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& s = results[k].log.summary;
    v.require(s.converged, results[k].run.name + " did not converge");
    if (s.parking_time) slowest = std::max(slowest, *s.parking_time);
  }
  for (std::size_t k = 0; k + 1 < results.size(); k += 2) {
    const auto& a = results[k].log.records;
    const auto& b = results[k + 1].log.records;
    if (a.size() != b.size()) {
      v.require(false, results[k].run.name + ": mirrored run has a different length");
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst = std::max({worst, std::abs(a[i].state.x - b[i].state.x),
                        std::abs(a[i].state.y + b[i].state.y),
                        std::abs(a[i].state.theta + b[i].state.theta)});
    }
  }
  v.require(worst <= 1e-6, fmt("mirror mismatch %.3g", worst));
  if (v.pass)
    v.detail = fmt("%zu runs converged (slowest %.1f s), max mirror deviation %.3g",
                   results.size(), slowest, worst);
  return v;
}

Verdict ac4() {
  Verdict v;
  const double beta = 22.0;
  SimConfig sim;
  sim.duration_max = 200.0;
  const Configuration start{-0.2, 0.6, 0.0};
  const Target target{2.3, 0.0, 0.0};
  const RunSpec rotated{start, target, ParkingMode::full_parking, beta};
  const RunSpec plain{to_rotated_frame(start, beta), target, ParkingMode::full_parking, 0.0};
  const auto a = run_scenario(kRobot, sim, {}, rotated);
  const auto b = run_scenario(kRobot, sim, {}, plain);

  const auto& s = a.summary;
  v.require(s.converged, "beta run did not converge");
  // distance of the final position from the line through the origin at beta
  const double b_rad = deg_to_rad(beta);
  const double off_line = -std::sin(b_rad) * s.final_pose.x + std::cos(b_rad) * s.final_pose.y;
  v.require(std::abs(off_line) < 0.02 && std::abs(wrap_deg(s.final_pose.theta - beta)) < 2.0,
            fmt("final pose off the line by %.4f m", off_line));

  double worst = 0.0;
  if (a.records.size() != b.records.size()) {
    v.require(false, fmt("lengths differ: %zu vs %zu", a.records.size(), b.records.size()));
  } else {
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const RobotState& p = a.records[i].state;
      const RobotState& q = b.records[i].state;
      const Configuration back = from_rotated_frame({q.x, q.y, rad_to_deg(q.theta)}, beta);
      worst = std::max({worst, std::abs(p.x - back.x), std::abs(p.y - back.y),
                        std::abs(p.theta - deg_to_rad(back.theta)), std::abs(p.v_xr - q.v_xr),
                        std::abs(p.omega - q.omega)});
    }
  }
  v.require(worst <= 1e-9, fmt("rotated trajectories differ by %.3g", worst));
  if (v.pass)
    v.detail = fmt("converged at %.2f s, %.4f m from the 22 deg line, max deviation %.3g",
                   *s.parking_time, off_line, worst);
  return v;
}

// Independent evaluation of the constrained equations of motion, written
// from the scalar formulas rather than through the library helpers.
struct Reference {
  double a_xr, alpha_dd, a_yr, scale_x, scale_alpha;
};

Reference reference_acceleration(const RobotParams& p, const RobotState& s,
                                 const ActuationInput& u) {
  const double m = p.mass, alpha = p.brake_x, inertia = p.inertia;
  const double v = s.v_xr, w = s.omega;
  double fx = 0.0, moment = 0.0, fx_abs = 0.0, moment_abs = 0.0;
  const bool on[2] = {u.brakes.left, u.brakes.right};
  for (int i = 0; i < 2; ++i) {
    if (!on[i]) continue;
    const double yi = p.brake_y[i];
    const double k = m * p.gravity * p.mu_k[i] / 3.0;
    const double slip = v - yi * w;
    const double norm = std::max(std::abs(slip), p.slip_epsilon);
    fx += -k * slip / norm;
    fx_abs += std::abs(k * slip / norm);
    moment += -(k / norm) * (-yi * v + yi * yi * w);
    moment_abs += std::abs((k / norm) * (-yi * v + yi * yi * w));
  }
  const double v_yr = -alpha * w;
  Reference r;
  r.a_xr = (u.drive_force + fx) / m + v_yr * w;
  r.alpha_dd = (moment + m * alpha * v * w) / (inertia + m * alpha * alpha);
  r.a_yr = -alpha * r.alpha_dd;
  r.scale_x = (std::abs(u.drive_force) + fx_abs) / m + std::abs(v_yr * w);
  r.scale_alpha = (moment_abs + std::abs(m * alpha * v * w)) / (inertia + m * alpha * alpha);
  return r;
}

Verdict ac5() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  double worst_rel = 0.0;
  for (int k = 0; k < 1000; ++k) {
    RobotParams p;
    p.mass = 6.8 * (1.0 + 0.3 * u(rng));
    p.inertia = 1.0 + 0.5 * u(rng);
    p.mu_k = {0.46 + 0.2 * u(rng), 0.46 + 0.2 * u(rng)};
    const RobotState s{5.0 * u(rng), 5.0 * u(rng), 4.0 * u(rng), 3.0 * u(rng), 3.0 * u(rng)};
    const ActuationInput in{10.0 * u(rng), {coin(rng), coin(rng)}};
    bool smooth = true;
    for (Brake b : kBrakes)
      if (in.brakes.active(b) && brake_slip_speed(p, s, b) <= p.slip_epsilon) smooth = false;
    if (!smooth) {
      --k;
      continue;
    }
    const LocalAcceleration a = local_acceleration(p, s, in);
    const Reference r = reference_acceleration(p, s, in);
    worst_rel = std::max({worst_rel, std::abs(a.a_xr - r.a_xr) / std::max(r.scale_x, 1e-300),
                          std::abs(a.alpha_dd - r.alpha_dd) / std::max(r.scale_alpha, 1e-300),
                          std::abs(a.a_yr - r.a_yr) /
                              std::max(p.brake_x * r.scale_alpha, 1e-300)});
  }
  v.require(worst_rel <= 1e-12, fmt("acceleration relative error %.3g", worst_rel));

  // RK4 at the default step against explicit Euler at a hundredth of it,
  // over 1 s with the brake contacts sliding throughout.
  const double dt = SimConfig{}.dt_physics;
  const double h = dt / 100.0;
  const long steps = std::lround(1.0 / dt);
  std::uniform_real_distribution<double> speed(1.5, 3.0);
  int compared = 0, attempts = 0;
  double worst_pos = 0.0, worst_heading = 0.0;
  while (compared < 12 && attempts < 500) {
    ++attempts;
    const RobotState s0{u(rng), u(rng), 3.0 * u(rng), speed(rng), 0.5 * u(rng)};
    const ActuationInput in{8.0 * u(rng), {coin(rng), coin(rng)}};
    RobotState rk = s0, eu = s0;
    double min_slip = 1e9;
    for (long k = 0; k < steps; ++k) {
      rk = integrate_step(kRobot, rk, in, dt);
      for (int j = 0; j < 100; ++j) eu = euler_step(kRobot, eu, in, h);
      for (Brake b : kBrakes)
        if (in.brakes.active(b)) min_slip = std::min(min_slip, brake_slip_speed(kRobot, rk, b));
      if (min_slip < 0.05) break;
    }
    if (min_slip < 0.05) continue;  // contact reached the stick region
    ++compared;
    worst_pos = std::max(worst_pos, std::hypot(rk.x - eu.x, rk.y - eu.y));
    worst_heading = std::max(worst_heading, std::abs(rk.theta - eu.theta));
  }
  v.require(compared >= 12, fmt("only %d smooth cases", compared));
  v.require(worst_pos <= 1e-4 && worst_heading <= 1e-4,
            fmt("RK4 vs Euler: %.3g m, %.3g rad", worst_pos, worst_heading));
  if (v.pass)
    v.detail = fmt("max rel error %.3g over 1000 states; RK4 vs Euler(dt/100) %.2g m, %.2g rad "
                   "over %d runs",
                   worst_rel, worst_pos, worst_heading, compared);
  return v;
}

Verdict ac6() {
  Verdict v;
  const fuzzy::FisDefinition fis = fuzzy::default_parking_fis();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0), degree(0.0, 1.0);
  constexpr int kSamples = 100000;

  long both = 0, unbounded = 0, asymmetric = 0, failed = 0, brake_mismatch = 0;
  for (int k = 0; k < kSamples; ++k) {
    // a third of the inputs lie outside the universes
    const double spread = k % 3 == 0 ? 5.0 : 1.0;
    const fuzzy::FuzzyError e{90.0 * spread * u(rng), 2.0 * spread * u(rng),
                              90.0 * spread * u(rng)};
    const fuzzy::FuzzyError m{-e.e_theta, -e.e_y, -e.e_theta_dot};
    try {
      const auto f = fuzzy::crisp_output(fis, e);
      const auto fm = fuzzy::crisp_output(fis, m);
      const BrakeCommand b = fuzzy::discretize_brakes(f, fis.dead_band);
      const BrakeCommand bm = fuzzy::discretize_brakes(fm, fis.dead_band);
      both += (b.left && b.right) ? 1 : 0;
      if (f && (*f < fis.output.universe.lower || *f > fis.output.universe.upper)) ++unbounded;
      if (f.has_value() != fm.has_value() || (f && *fm != -*f)) ++asymmetric;
      if (bm != BrakeCommand{b.right, b.left}) ++brake_mismatch;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  v.require(both == 0, fmt("%ld outputs with both brakes", both));
  v.require(unbounded == 0, fmt("%ld outputs outside the universe", unbounded));
  v.require(asymmetric == 0 && brake_mismatch == 0,
            fmt("%ld/%ld mirror violations", asymmetric, brake_mismatch));
  v.require(failed == 0, fmt("%ld inputs rejected", failed));

  // spot checks: (e_y Z, e_theta N, e_theta_dot Z) -> N, its mirror -> P, and
  // the dashed (Z, Z, Z) cell fires nothing, each at random activation
  using fuzzy::Term;
  long spot_fail = 0;
  auto single = [](Term ey, Term et, Term ed, double d) {
    fuzzy::Fuzzified f;
    f.e_y[fuzzy::index(ey)] = d;
    f.e_theta[fuzzy::index(et)] = d;
    f.e_theta_dot[fuzzy::index(ed)] = d;
    return f;
  };
  const auto& grid = fis.output.universe;
  for (int k = 0; k < kSamples; ++k) {
    const double d = std::max(degree(rng), 1e-3);
    const auto neg = fuzzy::infer(fis, single(Term::Z, Term::N, Term::Z, d));
    const auto pos = fuzzy::infer(fis, single(Term::Z, Term::P, Term::Z, d));
    const auto none = fuzzy::infer(fis, single(Term::Z, Term::Z, Term::Z, d));
    bool ok = true;
    const std::size_t j = static_cast<std::size_t>(k) % grid.samples;
    const double x = grid.sample(j);
    ok &= neg.membership[j] == std::min(d, fis.output.negative(x));
    ok &= pos.membership[j] == std::min(d, fis.output.positive(x));
    ok &= none.membership[j] == 0.0;
    ok &= fuzzy::discretize_brakes(fuzzy::defuzzify_coa(neg), fis.dead_band) ==
          BrakeCommand{false, true};
    ok &= fuzzy::discretize_brakes(fuzzy::defuzzify_coa(pos), fis.dead_band) ==
          BrakeCommand{true, false};
    ok &= !fuzzy::defuzzify_coa(none).has_value();
    spot_fail += ok ? 0 : 1;
  }
  v.require(spot_fail == 0, fmt("%ld spot-check failures", spot_fail));
  if (v.pass)
    v.detail = fmt("%d random inputs (mirror, no (1,1), bounded, total) and %d spot checks",
                   kSamples, kSamples);
  return v;
}

Verdict ac7() {
  Verdict v;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  const double dt = SimConfig{}.dt_physics;
  const long steps = std::lround(2.0 / dt);
  double worst_rise = -1e300;
  long total = 0;
  for (int run = 0; run < 100; ++run) {
    const int b = pick(rng);
    const ActuationInput in{0.0, {(b & 1) != 0, (b & 2) != 0}};
    RobotState s{u(rng), u(rng), 3.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng)};
    double ke = kinetic_energy(kRobot, s);
    for (long k = 0; k < steps; ++k) {
      s = integrate_step(kRobot, s, in, dt);
      const double next = kinetic_energy(kRobot, s);
      worst_rise = std::max(worst_rise, next - ke);
      ke = next;
      ++total;
    }
  }
  v.require(worst_rise <= 1e-6, fmt("kinetic energy rose by %.3g J in one step", worst_rise));
  if (v.pass)
    v.detail = fmt("100 runs, %ld steps, largest per-step change %+.3g J", total, worst_rise);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict ac8(const std::string& exe, const std::string& bundle) {
  Verdict v;
  const fs::path base = fs::temp_directory_path() / fmt("mamr_ac8_%d", static_cast<int>(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> dirs{base / "a", base / "b"};
  const unsigned par[2] = {workers(), 1};
  for (int k = 0; k < 2; ++k) {
    const std::string cmd = "\"" + exe + "\" run --scenario \"" + bundle + "\" --seed 2026 --out \"" +
                            dirs[k].string() + "\" --parallel " + std::to_string(par[k]) +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    v.require(status == 0, fmt("execution %d exited with status %d", k + 1, status));
  }
  std::size_t files = 0;
  if (v.pass) {
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const fs::path twin = dirs[1] / entry.path().filename();
      v.require(fs::exists(twin) && slurp(entry.path()) == slurp(twin),
                entry.path().filename().string() + " differs");
    }
    std::size_t other = 0;
    for (const auto& entry : fs::directory_iterator(dirs[1]))
      other += entry.path().extension() == ".csv" ? 1 : 0;
    v.require(files > 0 && files == other, fmt("file counts %zu vs %zu", files, other));
  }
  if (v.pass)
    v.detail = fmt("%zu trajectory files byte-identical across two executions (%u vs 1 worker)",
                   files, par[0]);
  fs::remove_all(base);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <mamr executable> <scenario bundle>\n", argv[0]);
    return 2;
  }
  const std::string exe = argv[1], bundle = argv[2];

  const std::vector<std::pair<const char*, std::function<Verdict()>>> checks = {
      {"AC1 flc-only reproduction", ac1},
      {"AC2 full-parking reproduction", ac2},
      {"AC3 sweep convergence and mirror symmetry", ac3},
      {"AC4 beta-rotation equivariance", ac4},
      {"AC5 dynamics oracle", ac5},
      {"AC6 fuzzy inference properties", ac6},
      {"AC7 dissipativity", ac7},
      {"AC8 determinism", [&] { return ac8(exe, bundle); }},
  };

  int failed = 0;
  for (const auto& [name, check] : checks) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
