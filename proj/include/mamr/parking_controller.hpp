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

// Sequential parking controller. ALIGN runs the fuzzy brake controller at a
// constant drive force until the lateral and heading errors settle; PARK_X
// then closes the remaining distance along the target line with a saturated
// proportional drive force and stops the robot with both brakes once it is
// inside the x tolerance. A final heading beta is handled by expressing the
// robot in a global frame rotated by beta about the origin.

#include <algorithm>
#include <cmath>
#include <optional>

#include "mamr/angles.hpp"
#include "mamr/dynamics.hpp"
#include "mamr/errors.hpp"
#include "mamr/fuzzy.hpp"

namespace mamr {

/// Pose as reported externally: metres and degrees.
struct Configuration {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // deg

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Desired configuration in the beta-rotated frame. An empty `x` leaves the
/// position along the target line free.
struct Target {
  std::optional<double> x;
  double y = 0.0;
  double theta = 0.0;  // deg

  friend bool operator==(const Target&, const Target&) = default;
};

enum class ParkingMode { flc_only, full_parking };

enum class ControllerPhase { align = 0, park_x = 1, done = 2 };

inline const char* to_string(ControllerPhase p) {
  switch (p) {
    case ControllerPhase::align: return "ALIGN";
    case ControllerPhase::park_x: return "PARK_X";
    case ControllerPhase::done: return "DONE";
  }
  return "?";
}

struct ControllerConfig {
  fuzzy::FisDefinition fis = fuzzy::default_parking_fis();
  double align_drive_force = 3.4817604851964936;  // N, constant during ALIGN
  double k_p = 10.0;               // N/m
  double saturation_force = 3.7254837191602483;  // N
  double min_force = 1.0;          // N, drive floor outside the x tolerance
  double tol_y = 0.02;             // m
  double tol_theta = 2.0;          // deg
  double tol_x = 0.05;             // m
  double hold_time = 0.5;          // s
  double beta = 0.0;               // deg, final heading of the target line
  bool reentry_guard = true;       // FLC brakes in PARK_X after drifting out of line
  double guard_engage = 0.50178186713479589;  // multiples of (tol_y, tol_theta)
  double guard_release = 0.25089093356739794;
  bool arrival_brake = true;       // both brakes to stop on the target
  double brake_deceleration = 3.0; // m/s^2, assumed with both brakes locked

  void validate() const {
    fis.validate();
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InputDomainError(std::string("ControllerConfig: ") + what);
    };
    require(std::isfinite(align_drive_force) && std::abs(align_drive_force) <= saturation_force,
            "|align_drive_force| must not exceed saturation_force");
    require(std::isfinite(k_p) && k_p > 0.0, "k_p must be > 0");
    require(std::isfinite(min_force) && min_force > 0.0, "min_force must be > 0");
    require(std::isfinite(saturation_force) && saturation_force >= min_force,
            "saturation_force must be >= min_force");
    require(tol_y > 0.0 && tol_theta > 0.0 && tol_x > 0.0, "tolerances must be > 0");
    require(std::isfinite(hold_time) && hold_time >= 0.0, "hold_time must be >= 0");
    require(std::isfinite(beta), "beta must be finite");
    require(std::isfinite(guard_engage) && std::isfinite(guard_release) &&
                guard_release > 0.0 && guard_release <= guard_engage,
            "guard thresholds must satisfy 0 < guard_release <= guard_engage");
    require(std::isfinite(brake_deceleration) && brake_deceleration > 0.0,
            "brake_deceleration must be > 0");
  }
};

struct TrackingError {
  fuzzy::FuzzyError fuzzy;
  std::optional<double> e_x;  // m, empty when x is free
};

/// Expresses a global pose in the frame rotated by beta (deg) about the
/// origin.
inline Configuration to_rotated_frame(const Configuration& c, double beta) {
  const double b = deg_to_rad(beta);
  const double cb = std::cos(b);
  const double sb = std::sin(b);
  return {cb * c.x + sb * c.y, -sb * c.x + cb * c.y, c.theta - beta};
}

inline Configuration from_rotated_frame(const Configuration& c, double beta) {
  const double b = deg_to_rad(beta);
  const double cb = std::cos(b);
  const double sb = std::sin(b);
  return {cb * c.x - sb * c.y, sb * c.x + cb * c.y, c.theta + beta};
}

/// Controller errors from an observed pose and yaw rate (deg/s):
/// e_theta = theta_d - theta, e_y = y_d - y, e_theta_dot = -theta_dot,
/// e_x = x_d - x, all in the beta-rotated frame.
inline TrackingError compute_errors(const Configuration& observed, double theta_dot,
                                    const Target& target, double beta) {
  const Configuration r = beta == 0.0 ? observed : to_rotated_frame(observed, beta);
  TrackingError e;
  e.fuzzy.e_theta = wrap_deg(target.theta - r.theta);
  e.fuzzy.e_y = target.y - r.y;
  e.fuzzy.e_theta_dot = -theta_dot;
  if (target.x) e.e_x = *target.x - r.x;
  return e;
}

inline TrackingError compute_errors(const RobotState& s, const Target& target, double beta) {
  return compute_errors(Configuration{s.x, s.y, rad_to_deg(s.theta)}, rad_to_deg(s.omega),
                        target, beta);
}

struct ControlOutput {
  ActuationInput input;
  ControllerPhase phase = ControllerPhase::align;
};

class ParkingController {
 public:
  explicit ParkingController(ControllerConfig config,
                             ParkingMode mode = ParkingMode::full_parking)
      : config_(std::move(config)), mode_(mode) {
    config_.validate();
  }

  const ControllerConfig& config() const { return config_; }
  ParkingMode mode() const { return mode_; }
  ControllerPhase phase() const { return phase_; }

  /// Elapsed controller time at which ALIGN finished, if it has.
  std::optional<double> alignment_time() const { return alignment_time_; }

  /// Advances the controller by one control period `dt`. `errors.e_x` must be
  /// present in full-parking mode.
  ControlOutput step(const TrackingError& errors, double dt) {
    const bool first = ticks_ == 0;
    ++ticks_;
    time_ += dt;

    if (phase_ == ControllerPhase::align) {
      if (aligned(errors, 1.0)) {
        hold_ += dt;
      } else {
        hold_ = 0.0;
      }
      // A run that starts inside the band has no transient to filter.
      if (first && aligned(errors, 1.0)) hold_ = config_.hold_time;
      if (hold_ >= config_.hold_time - 1e-9) {
        alignment_time_ = time_ - dt;
        hold_ = 0.0;
        if (mode_ == ParkingMode::flc_only) {
          phase_ = ControllerPhase::done;
        } else {
          phase_ = ControllerPhase::park_x;
          if (!errors.e_x)
            throw InputDomainError("ParkingController: full parking needs a target x");
          if (*errors.e_x < 0.0) overshot_before_alignment_ = true;
        }
      } else {
        return {{config_.align_drive_force, fuzzy::evaluate(config_.fis, errors.fuzzy)},
                phase_};
      }
    }

    if (phase_ == ControllerPhase::park_x) {
      const double ex = errors.e_x.value_or(0.0);
      // speed towards x_d from successive errors
      const double x_rate = prev_e_x_ ? (*prev_e_x_ - ex) / dt : 0.0;
      prev_e_x_ = ex;
      const double toward = ex >= 0.0 ? x_rate : -x_rate;
      if (std::abs(ex) < config_.tol_x) {
        hold_ += dt;
        if (hold_ >= config_.hold_time - 1e-9) {
          phase_ = ControllerPhase::done;
        } else {
          return {{0.0, config_.arrival_brake ? BrakeCommand::both() : BrakeCommand::none()},
                  phase_};
        }
      } else {
        hold_ = 0.0;
        const double magnitude =
            std::clamp(config_.k_p * std::abs(ex), config_.min_force, config_.saturation_force);
        const double force = std::copysign(magnitude, ex);
        // the locked pair outweighs any drive force within the saturation
        if (config_.arrival_brake && stopping(toward, std::abs(ex)))
          return {{force, BrakeCommand::both()}, phase_};
        if (config_.reentry_guard) {
          if (!aligned(errors, config_.guard_engage)) steering_ = true;
          else if (aligned(errors, config_.guard_release)) steering_ = false;
        }
        return {{force, steering_ ? steer(errors, force) : BrakeCommand::none()}, phase_};
      }
    }

    return {{0.0, BrakeCommand::none()}, ControllerPhase::done};
  }

  /// True when ALIGN finished with the robot already past x_d.
  bool overshot_before_alignment() const { return overshot_before_alignment_; }

 private:
  bool aligned(const TrackingError& e, double scale) const {
    return std::abs(e.fuzzy.e_y) < scale * config_.tol_y &&
           std::abs(e.fuzzy.e_theta) < scale * config_.tol_theta;
  }

  // Both brakes while the robot recedes from x_d, or when it approaches fast
  // enough to need the whole remaining distance to stop.
  bool stopping(double toward, double distance) const {
    constexpr double kCreep = 0.05;  // m/s
    if (toward < -kCreep) return true;
    return toward > 0.0 && toward * toward >= 2.0 * config_.brake_deceleration * distance;
  }

  // Reversing turns the robot the other way under the same brake and makes it
  // approach the line with the opposite heading, so the fuzzy controller sees
  // a negated lateral error and its brakes are swapped.
  BrakeCommand steer(const TrackingError& e, double force) const {
    if (force > 0.0) return fuzzy::evaluate(config_.fis, e.fuzzy);
    fuzzy::FuzzyError mirrored = e.fuzzy;
    mirrored.e_y = -mirrored.e_y;
    const BrakeCommand b = fuzzy::evaluate(config_.fis, mirrored);
    return {b.right, b.left};
  }

  ControllerConfig config_;
  ParkingMode mode_;
  ControllerPhase phase_ = ControllerPhase::align;
  double hold_ = 0.0;
  double time_ = 0.0;
  long ticks_ = 0;
  std::optional<double> alignment_time_;
  std::optional<double> prev_e_x_;
  bool steering_ = false;
  bool overshot_before_alignment_ = false;
};

/// Copy of `controller` that stops after alignment with x left uncontrolled.
inline ParkingController flc_only_mode(const ParkingController& controller) {
  return ParkingController(controller.config(), ParkingMode::flc_only);
}

}  // namespace mamr
