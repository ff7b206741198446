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

// Closed-loop simulation: the controller runs at a fixed control period, its
// actuation is held constant while the dynamics are integrated with a finer
// fixed physics step, and one record is logged per control tick.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mamr/angles.hpp"
#include "mamr/dynamics.hpp"
#include "mamr/errors.hpp"
#include "mamr/parking_controller.hpp"

namespace mamr {

enum class Integrator { rk4, semi_implicit_euler };

struct SensorNoise {
  double x = 0.0;      // m, standard deviation
  double y = 0.0;      // m
  double theta = 0.0;  // deg

  bool zero() const { return x == 0.0 && y == 0.0 && theta == 0.0; }

  friend bool operator==(const SensorNoise&, const SensorNoise&) = default;
};

struct SimConfig {
  double dt_physics = 5e-5;      // s
  double control_period = 0.02;  // s
  double duration_max = 60.0;    // s
  Integrator integrator = Integrator::rk4;
  SensorNoise noise;
  std::uint64_t seed = 0;

  /// Physics steps per control tick.
  long substeps() const { return std::lround(control_period / dt_physics); }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InputDomainError(std::string("SimConfig: ") + what);
    };
    require(std::isfinite(dt_physics) && dt_physics > 0.0, "dt_physics must be > 0");
    require(std::isfinite(control_period) && control_period >= dt_physics,
            "control_period must be >= dt_physics");
    const double ratio = control_period / dt_physics;
    require(std::abs(ratio - std::round(ratio)) < 1e-6 * ratio,
            "control_period must be an integer multiple of dt_physics");
    require(std::isfinite(duration_max) && duration_max > 0.0, "duration_max must be > 0");
    require(noise.x >= 0.0 && noise.y >= 0.0 && noise.theta >= 0.0,
            "noise standard deviations must be >= 0");
  }
};

namespace detail {

struct StateRate {
  double x, y, theta, v_xr, omega;
};

inline StateRate rate(const RobotParams& p, const RobotState& s, const ActuationInput& u) {
  const Eigen::Vector3d g = to_global_velocity(p, s);
  const LocalAcceleration a = local_acceleration(p, s, u);
  return {g.x(), g.y(), g.z(), a.a_xr, a.alpha_dd};
}

inline RobotState advance(const RobotState& s, const StateRate& r, double h) {
  return {s.x + h * r.x, s.y + h * r.y, s.theta + h * r.theta, s.v_xr + h * r.v_xr,
          s.omega + h * r.omega};
}

inline std::string describe(const RobotState& s) {
  std::ostringstream os;
  os << "x=" << s.x << " y=" << s.y << " theta=" << s.theta << " v_xr=" << s.v_xr
     << " omega=" << s.omega;
  return os.str();
}

}  // namespace detail

/// One explicit Euler step; the reference scheme for integrator checks.
inline RobotState euler_step(const RobotParams& p, const RobotState& s, const ActuationInput& u,
                             double dt) {
  return detail::advance(s, detail::rate(p, s, u), dt);
}

/// Advances the state by `dt` with the input held constant. Throws
/// IntegrationDivergence if the result is not finite.
inline RobotState integrate_step(const RobotParams& p, const RobotState& s,
                                 const ActuationInput& u, double dt,
                                 Integrator scheme = Integrator::rk4) {
  RobotState next;
  if (scheme == Integrator::rk4) {
    using detail::advance;
    using detail::rate;
    const auto k1 = rate(p, s, u);
    const auto k2 = rate(p, advance(s, k1, 0.5 * dt), u);
    const auto k3 = rate(p, advance(s, k2, 0.5 * dt), u);
    const auto k4 = rate(p, advance(s, k3, dt), u);
    auto combine = [dt](double a, double b, double c, double d) {
      return dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    };
    next = {s.x + combine(k1.x, k2.x, k3.x, k4.x), s.y + combine(k1.y, k2.y, k3.y, k4.y),
            s.theta + combine(k1.theta, k2.theta, k3.theta, k4.theta),
            s.v_xr + combine(k1.v_xr, k2.v_xr, k3.v_xr, k4.v_xr),
            s.omega + combine(k1.omega, k2.omega, k3.omega, k4.omega)};
  } else {
    // velocities first, then the pose with the updated velocities
    const LocalAcceleration a = local_acceleration(p, s, u);
    RobotState mid = s;
    mid.v_xr += dt * a.a_xr;
    mid.omega += dt * a.alpha_dd;
    const Eigen::Vector3d g = to_global_velocity(p, mid);
    next = mid;
    next.x += dt * g.x();
    next.y += dt * g.y();
    next.theta += dt * g.z();
  }
  if (!next.finite())
    throw IntegrationDivergence("integration diverged from state {" + detail::describe(s) +
                                "} with F_d=" + std::to_string(u.drive_force) +
                                " dt=" + std::to_string(dt));
  return next;
}

struct Observation {
  Configuration pose;       // theta in deg
  double theta_dot = 0.0;   // deg/s
};

/// Noisy readout of the pose. Each channel gets independent zero-mean Gaussian
/// noise; zero standard deviations return the true state without drawing.
template <typename Rng>
Observation sense(const RobotState& s, const SensorNoise& noise, Rng& rng) {
  Observation o{{s.x, s.y, rad_to_deg(s.theta)}, rad_to_deg(s.omega)};
  if (noise.zero()) return o;
  std::normal_distribution<double> unit(0.0, 1.0);
  o.pose.x += noise.x * unit(rng);
  o.pose.y += noise.y * unit(rng);
  o.pose.theta += noise.theta * unit(rng);
  return o;
}

struct LogRecord {
  double t = 0.0;
  RobotState state;
  ActuationInput input;
  ControllerPhase phase = ControllerPhase::align;
  double e_y = 0.0;      // m
  double e_theta = 0.0;  // deg
};

enum class RunOutcome { done, timeout, diverged };

inline const char* to_string(RunOutcome o) {
  switch (o) {
    case RunOutcome::done: return "done";
    case RunOutcome::timeout: return "timeout";
    case RunOutcome::diverged: return "diverged";
  }
  return "?";
}

struct RunSummary {
  RunOutcome outcome = RunOutcome::timeout;
  bool converged = false;
  std::optional<double> alignment_time;  // s
  std::optional<double> parking_time;    // s, time DONE was reached
  Configuration final_pose;              // global frame, deg
  double final_e_x = std::numeric_limits<double>::quiet_NaN();
  double final_e_y = 0.0;
  double final_e_theta = 0.0;
  double max_constraint_residual = 0.0;
  std::vector<std::string> warnings;
};

struct TrajectoryLog {
  std::vector<LogRecord> records;
  RunSummary summary;
};

/// Initial condition, target and mode of one closed-loop run.
struct RunSpec {
  Configuration start;  // global frame
  Target target;        // beta-rotated frame
  ParkingMode mode = ParkingMode::full_parking;
  double beta = 0.0;    // deg
};

/// Final errors within the controller tolerances (x only when controlled).
inline bool within_tolerances(const ControllerConfig& c, const TrackingError& e) {
  const bool yt = std::abs(e.fuzzy.e_y) < c.tol_y && std::abs(e.fuzzy.e_theta) < c.tol_theta;
  if (!e.e_x) return yt;
  return yt && std::abs(*e.e_x) < c.tol_x;
}

/// Runs one closed-loop scenario until the controller reports DONE or the
/// time budget runs out. Divergence of the integrator ends the run with
/// outcome `diverged` and a diagnostic in the warnings.
inline TrajectoryLog run_scenario(const RobotParams& params, const SimConfig& sim,
                                  ControllerConfig control, const RunSpec& run) {
  params.validate();
  sim.validate();
  control.beta = run.beta;
  ParkingController controller(control, run.mode);
  const std::optional<double> target_x =
      run.mode == ParkingMode::flc_only ? std::nullopt : run.target.x;
  const Target target{target_x, run.target.y, run.target.theta};
  if (run.mode == ParkingMode::full_parking && !target.x)
    throw InputDomainError("run_scenario: full parking needs a target x");

  std::mt19937_64 rng(sim.seed);
  RobotState state{run.start.x, run.start.y, deg_to_rad(run.start.theta), 0.0, 0.0};
  const long substeps = sim.substeps();
  const double dt = sim.control_period / static_cast<double>(substeps);
  const long max_ticks = static_cast<long>(std::floor(sim.duration_max / sim.control_period));

  TrajectoryLog log;
  log.records.reserve(static_cast<std::size_t>(max_ticks) + 1);
  RunSummary& summary = log.summary;

  for (long tick = 0;; ++tick) {
    const double t = static_cast<double>(tick) * sim.control_period;
    const Observation obs = sense(state, sim.noise, rng);
    const TrackingError errors = compute_errors(obs.pose, obs.theta_dot, target, run.beta);
    const ControlOutput out = controller.step(errors, sim.control_period);
    const TrackingError truth = compute_errors(state, target, run.beta);

    log.records.push_back(
        {t, state, out.input, out.phase, truth.fuzzy.e_y, truth.fuzzy.e_theta});
    summary.max_constraint_residual =
        std::max(summary.max_constraint_residual, constraint_residual(params, state));

    if (out.phase == ControllerPhase::done) {
      summary.outcome = RunOutcome::done;
      summary.parking_time = t;
      break;
    }
    if (tick >= max_ticks) {
      summary.outcome = RunOutcome::timeout;
      break;
    }
    try {
      for (long k = 0; k < substeps; ++k)
        state = integrate_step(params, state, out.input, dt, sim.integrator);
    } catch (const IntegrationDivergence& e) {
      summary.outcome = RunOutcome::diverged;
      summary.warnings.emplace_back(e.what());
      break;
    }
  }

  const TrackingError final_errors = compute_errors(state, target, run.beta);
  summary.final_pose = {state.x, state.y, wrap_deg(rad_to_deg(state.theta))};
  summary.final_e_y = final_errors.fuzzy.e_y;
  summary.final_e_theta = final_errors.fuzzy.e_theta;
  if (final_errors.e_x) summary.final_e_x = *final_errors.e_x;
  summary.alignment_time = controller.alignment_time();
  summary.converged =
      summary.outcome != RunOutcome::diverged && within_tolerances(control, final_errors);
  if (controller.overshot_before_alignment())
    summary.warnings.emplace_back("alignment finished after the robot had passed x_d");
  return log;
}

}  // namespace mamr
