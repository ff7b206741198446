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

// Planar rigid-body dynamics of a three-wheel robot driven by one omni wheel
// (force along the body x axis through the centre of mass) and steered by two
// ON/OFF brakes on the front wheels. The front axle midpoint cannot slip
// sideways, which ties the lateral body velocity to the yaw rate:
//
//   v_yr = -brake_x * omega
//
// so the state only carries (x, y, theta, v_xr, omega).

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mamr/errors.hpp"

namespace mamr {

/// Front brake. `left` is brake 1 (positive lateral offset), `right` is
/// brake 2 (negative lateral offset).
enum class Brake { left = 0, right = 1 };

inline constexpr std::array<Brake, 2> kBrakes{Brake::left, Brake::right};

constexpr std::size_t index(Brake b) { return static_cast<std::size_t>(b); }

struct RobotParams {
  double mass = 6.8;                        // kg
  double inertia = 1.0;                     // kg m^2 about the centre of mass
  double gravity = 9.81;                    // m/s^2
  std::array<double, 2> mu_k{0.46, 0.46};   // kinetic friction, per brake
  double brake_x = 0.93;                    // m, longitudinal offset of both brakes
  std::array<double, 2> brake_y{0.155, -0.155};  // m, lateral offsets
  double slip_epsilon = 1e-4;               // m/s, friction regularisation floor
  double drive_force_limit = 20.0;          // N, |F_d| bound of the drive wheel

  double mu(Brake b) const { return mu_k[index(b)]; }
  double lateral(Brake b) const { return brake_y[index(b)]; }

  /// Normal load on one contact; the weight is shared equally by the three
  /// wheels.
  double contact_load() const { return mass * gravity / 3.0; }

  /// Rotational inertia about the front axle midpoint.
  double pivot_inertia() const { return inertia + mass * brake_x * brake_x; }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InputDomainError(std::string("RobotParams: ") + what);
    };
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(std::isfinite(inertia) && inertia > 0.0, "inertia must be > 0");
    require(std::isfinite(gravity) && gravity > 0.0, "gravity must be > 0");
    require(std::isfinite(mu_k[0]) && mu_k[0] >= 0.0 && std::isfinite(mu_k[1]) &&
                mu_k[1] >= 0.0,
            "mu_k must be >= 0");
    require(std::isfinite(brake_x) && brake_x > 0.0, "brake_x must be > 0");
    require(std::isfinite(brake_y[0]) && std::isfinite(brake_y[1]) && brake_y[0] > 0.0 &&
                brake_y[1] < 0.0,
            "brake_y must satisfy brake_y[0] > 0 > brake_y[1]");
    require(std::isfinite(slip_epsilon) && slip_epsilon > 0.0, "slip_epsilon must be > 0");
    require(std::isfinite(drive_force_limit) && drive_force_limit > 0.0,
            "drive_force_limit must be > 0");
  }
};

/// Generalised pose in the global frame plus the two independent body
/// velocities. theta is in radians and is never wrapped while integrating.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v_xr = 0.0;
  double omega = 0.0;

  /// Lateral body velocity implied by the no-slip constraint.
  double v_yr(const RobotParams& p) const { return -p.brake_x * omega; }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) &&
           std::isfinite(v_xr) && std::isfinite(omega);
  }
};

struct BrakeCommand {
  bool left = false;   // F(1)
  bool right = false;  // F(2)

  bool active(Brake b) const { return b == Brake::left ? left : right; }
  int f1() const { return left ? 1 : 0; }
  int f2() const { return right ? 1 : 0; }

  static constexpr BrakeCommand none() { return {}; }
  static constexpr BrakeCommand both() { return {true, true}; }

  friend bool operator==(const BrakeCommand&, const BrakeCommand&) = default;
};

struct ActuationInput {
  double drive_force = 0.0;  // N, along x_r through G
  BrakeCommand brakes;

  friend bool operator==(const ActuationInput&, const ActuationInput&) = default;
};

struct LocalAcceleration {
  double a_xr = 0.0;      // d(v_xr)/dt
  double a_yr = 0.0;      // d(v_yr)/dt, always -brake_x * alpha_dd
  double alpha_dd = 0.0;  // d(omega)/dt
};

/// Rotation taking local (x_r, y_r, theta) triples to the global frame.
inline Eigen::Matrix3d rotation_to_global(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, -s, 0.0,  //
      s, c, 0.0,    //
      0.0, 0.0, 1.0;
  return r;
}

/// Signed slip velocity of brake point `b` along x_r. The lateral component
/// vanishes under the no-slip constraint.
inline double brake_slip_velocity(const RobotParams& p, const RobotState& s, Brake b) {
  return s.v_xr - p.lateral(b) * s.omega;
}

inline double brake_slip_speed(const RobotParams& p, const RobotState& s, Brake b) {
  return std::abs(brake_slip_velocity(p, s, b));
}

/// Friction scale k / max(|v_slip|, eps) shared by the force and moment of an
/// active brake; zero when the brake is released.
inline double friction_gain(const RobotParams& p, const RobotState& s, BrakeCommand brakes,
                            Brake b) {
  if (!brakes.active(b)) return 0.0;
  const double speed = std::max(brake_slip_speed(p, s, b), p.slip_epsilon);
  return p.contact_load() * p.mu(b) / speed;
}

/// Coulomb friction at brake `b` in the body frame (N).
inline Eigen::Vector2d friction_force(const RobotParams& p, const RobotState& s,
                                      BrakeCommand brakes, Brake b) {
  const double gain = friction_gain(p, s, brakes, b);
  return {-gain * brake_slip_velocity(p, s, b), 0.0};
}

/// Yaw moment of the brake friction about the centre of mass (N m).
inline double friction_moment(const RobotParams& p, const RobotState& s, BrakeCommand brakes,
                              Brake b) {
  const double gain = friction_gain(p, s, brakes, b);
  const double yb = p.lateral(b);
  return -gain * (-yb * s.v_xr + yb * yb * s.omega);
}

/// Body-frame accelerations under the drive force and brake friction. The
/// lateral reaction at the front axle is eliminated through the
/// differentiated constraint, which gives the pivot inertia I + m*brake_x^2
/// and the m*brake_x*v_xr*omega coupling in the yaw equation.
inline LocalAcceleration local_acceleration(const RobotParams& p, const RobotState& s,
                                            const ActuationInput& u) {
  const double m = p.mass;
  // Brake terms are summed pairwise before anything else is added so that
  // swapping the brakes on a mirrored state reproduces the result exactly.
  const double friction_x = friction_force(p, s, u.brakes, Brake::left).x() +
                            friction_force(p, s, u.brakes, Brake::right).x();
  const double friction_m = friction_moment(p, s, u.brakes, Brake::left) +
                            friction_moment(p, s, u.brakes, Brake::right);

  LocalAcceleration acc;
  // v_yr * omega with v_yr = -brake_x * omega
  acc.a_xr = (u.drive_force + friction_x) / m + s.v_yr(p) * s.omega;
  acc.alpha_dd = (friction_m + m * p.brake_x * s.v_xr * s.omega) / p.pivot_inertia();
  acc.a_yr = -p.brake_x * acc.alpha_dd;
  return acc;
}

/// Resultant lateral reaction R_f = F_r - F_l of the front wheels. Diagnostic
/// only; the equations of motion have it eliminated.
inline double constraint_force(const RobotParams& p, const RobotState& s, double alpha_dd) {
  return -p.mass * p.brake_x * alpha_dd + p.mass * s.v_xr * s.omega;
}

/// Global-frame rates (x_dot, y_dot, theta_dot).
inline Eigen::Vector3d to_global_velocity(const RobotParams& p, const RobotState& s) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const double v_yr = s.v_yr(p);
  return {s.v_xr * c - v_yr * sn, s.v_xr * sn + v_yr * c, s.omega};
}

inline double kinetic_energy(const RobotParams& p, const RobotState& s) {
  const double v_yr = s.v_yr(p);
  return 0.5 * p.mass * (s.v_xr * s.v_xr + v_yr * v_yr) + 0.5 * p.inertia * s.omega * s.omega;
}

/// |v_yr + brake_x * omega| with v_yr recomputed from the global rates. Zero up
/// to rounding; kept as a regression check on the state representation.
inline double constraint_residual(const RobotParams& p, const RobotState& s) {
  const Eigen::Vector3d g = to_global_velocity(p, s);
  const double v_yr = -g.x() * std::sin(s.theta) + g.y() * std::cos(s.theta);
  return std::abs(v_yr + p.brake_x * s.omega);
}

}  // namespace mamr
