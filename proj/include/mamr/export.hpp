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

// Trajectory CSV and run summaries. Numbers are written in fixed notation
// with six significant digits so files diff cleanly and parse back to the
// printed precision.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mamr/angles.hpp"
#include "mamr/errors.hpp"
#include "mamr/scenario.hpp"
#include "mamr/simulator.hpp"

namespace mamr {

inline constexpr const char* kCsvHeader =
    "t,x,y,theta_deg,v_xr,omega_deg_s,F_d,F1,F2,phase,e_y,e_theta";

/// Fixed-point text with `digits` significant digits. Tiny magnitudes are cut
/// off at 12 decimals; negative zero prints as zero.
inline std::string format_fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  int decimals = digits - 1;
  if (v != 0.0) {
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
    decimals = std::clamp(digits - 1 - exponent, 0, 12);
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline void write_csv(std::ostream& os, const TrajectoryLog& log) {
  os << kCsvHeader << '\n';
  for (const LogRecord& r : log.records) {
    os << format_fixed(r.t) << ',' << format_fixed(r.state.x) << ',' << format_fixed(r.state.y)
       << ',' << format_fixed(rad_to_deg(r.state.theta)) << ',' << format_fixed(r.state.v_xr)
       << ',' << format_fixed(rad_to_deg(r.state.omega)) << ','
       << format_fixed(r.input.drive_force) << ',' << r.input.brakes.f1() << ','
       << r.input.brakes.f2() << ',' << to_string(r.phase) << ',' << format_fixed(r.e_y) << ','
       << format_fixed(r.e_theta) << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, log);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// One parsed CSV line.
struct CsvRow {
  double t, x, y, theta_deg, v_xr, omega_deg_s, drive_force;
  int f1, f2;
  std::string phase;
  double e_y, e_theta;
};

inline std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("trajectory CSV: unexpected header");
  std::vector<CsvRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 12)
      throw std::runtime_error("trajectory CSV line " + std::to_string(number) +
                               ": expected 12 fields");
    auto num = [&](std::size_t i) { return std::stod(f[i]); };
    rows.push_back({num(0), num(1), num(2), num(3), num(4), num(5), num(6), std::stoi(f[7]),
                    std::stoi(f[8]), f[9], num(10), num(11)});
  }
  return rows;
}

inline json summary_to_json(const RunEntry& run, const RunSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = to_json(run);
  j["outcome"] = to_string(s.outcome);
  j["converged"] = s.converged;
  j["alignment_time"] = opt(s.alignment_time);
  j["parking_time"] = opt(s.parking_time);
  j["final_pose"] = {{"x", s.final_pose.x}, {"y", s.final_pose.y}, {"theta", s.final_pose.theta}};
  j["final_errors"] = {{"e_x", std::isnan(s.final_e_x) ? json(nullptr) : json(s.final_e_x)},
                       {"e_y", s.final_e_y},
                       {"e_theta", s.final_e_theta}};
  j["max_constraint_residual"] = s.max_constraint_residual;
  j["warnings"] = s.warnings;
  return j;
}

}  // namespace mamr
