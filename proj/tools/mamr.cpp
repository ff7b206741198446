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

// Command-line front end: run scenario files, sweep initial conditions,
// validate configurations and print the built-in defaults.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mamr/batch.hpp"
#include "mamr/export.hpp"
#include "mamr/scenario.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kNotConverged = 1, kConfig = 2, kRuntime = 3 };

struct Common {
  std::optional<std::string> scenario;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

struct BatchOptions {
  std::string out = "out";
  unsigned parallel = 1;
  bool allow_nonconvergence = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "override a field, e.g. controller.k_p=8 (repeatable)");
  cmd->add_option("--seed", c.seed, "global seed (replaces sim.seed)");
}

void add_batch(CLI::App* cmd, BatchOptions& b) {
  cmd->add_option("--out", b.out, "output directory")->capture_default_str();
  cmd->add_option("--parallel", b.parallel, "worker threads")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--allow-nonconvergence", b.allow_nonconvergence,
                "exit 0 even if some runs do not converge");
}

mamr::Scenario load(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("sim.seed=" + std::to_string(*c.seed));
  return mamr::load_scenario(c.scenario, overrides);
}

std::string file_stem(std::size_t index, const std::string& name) {
  std::string safe;
  for (char ch : name) safe.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ||
                                              ch == '.' || ch == '_'
                                          ? ch
                                          : '_');
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu_", index);
  return prefix + safe;
}

int execute(const mamr::Scenario& scenario, const std::vector<mamr::RunEntry>& runs,
            const BatchOptions& opt) {
  if (runs.empty()) {
    spdlog::warn("scenario has no runs; nothing to do");
    return kOk;
  }
  const fs::path out(opt.out);
  fs::create_directories(out);
  spdlog::info("{} run(s), {} worker(s), output in {}", runs.size(), opt.parallel, out.string());

  auto write = [&](std::size_t i, const mamr::RunResult& r) {
    mamr::write_csv(out / (file_stem(i, r.run.name) + ".csv"), r.log);
    spdlog::debug("finished {} ({})", r.run.name, mamr::to_string(r.log.summary.outcome));
  };
  const auto results = mamr::run_batch(scenario, runs, opt.parallel, write);

  mamr::json report = mamr::json::array();
  std::size_t converged = 0;
  std::cout << "run                              outcome   conv  align[s]  park[s]   e_x[m]     e_y[m]     e_theta[deg]\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = results[i].log.summary;
    mamr::json j = mamr::summary_to_json(results[i].run, s);
    j["trajectory"] = file_stem(i, results[i].run.name) + ".csv";
    report.push_back(j);
    converged += s.converged ? 1 : 0;
    auto num = [](const std::optional<double>& v) {
      return v ? mamr::format_fixed(*v, 4) : std::string("-");
    };
    std::printf("%-32s %-9s %-5s %-9s %-9s %-10s %-10s %s\n", results[i].run.name.c_str(),
                mamr::to_string(s.outcome), s.converged ? "yes" : "no",
                num(s.alignment_time).c_str(), num(s.parking_time).c_str(),
                std::isnan(s.final_e_x) ? "-" : mamr::format_fixed(s.final_e_x, 4).c_str(),
                mamr::format_fixed(s.final_e_y, 4).c_str(),
                mamr::format_fixed(s.final_e_theta, 4).c_str());
    for (const auto& w : s.warnings) spdlog::warn("{}: {}", results[i].run.name, w);
  }

  mamr::json summary = {{"scenario", mamr::to_json(scenario)},
                        {"runs", report},
                        {"converged", converged},
                        {"total", results.size()}};
  std::ofstream(out / "summary.json", std::ios::binary) << summary.dump(2) << '\n';

  spdlog::info("{}/{} run(s) converged", converged, results.size());
  if (converged == results.size() || opt.allow_nonconvergence) return kOk;
  return kNotConverged;
}

void set_log_level() {
  const char* env = std::getenv("MAMR_LOG_LEVEL");
  if (!env) return;
  const auto level = spdlog::level::from_str(env);
  if (level == spdlog::level::off && std::string(env) != "off") {
    spdlog::warn("MAMR_LOG_LEVEL={} not recognised; keeping info", env);
    return;
  }
  spdlog::set_level(level);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("mamr"));
  spdlog::set_pattern("[%l] %v");
  set_log_level();

  CLI::App app{"Brake-steered mobile robot parking simulator"};
  app.require_subcommand(1);

  Common run_common, sweep_common, check_common;
  BatchOptions run_opt, sweep_opt;

  auto* run = app.add_subcommand("run", "execute every run (and the sweep, if any) of a scenario");
  add_common(run, run_common);
  add_batch(run, run_opt);

  auto* sweep = app.add_subcommand("sweep", "execute a grid of initial conditions");
  add_common(sweep, sweep_common);
  add_batch(sweep, sweep_opt);
  std::vector<double> y0, theta0;
  bool mirror = false;
  sweep->add_option("--y0", y0, "initial y values [m]")->delimiter(',');
  sweep->add_option("--theta0", theta0, "initial headings [deg]")->delimiter(',');
  sweep->add_flag("--mirror", mirror, "also run the grid reflected through the x axis");

  auto* validate = app.add_subcommand("validate-config", "parse and check a scenario");
  add_common(validate, check_common);

  auto* defaults = app.add_subcommand("print-defaults", "print the default scenario as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto scenario = load(run_common);
      return execute(scenario, mamr::all_runs(scenario), run_opt);
    }
    if (*sweep) {
      const auto scenario = load(sweep_common);
      mamr::SweepSpec grid = scenario.sweep.value_or(mamr::SweepSpec{});
      if (!y0.empty()) grid.y0 = y0;
      if (!theta0.empty()) grid.theta0 = theta0;
      if (mirror) grid.mirror = true;
      if (grid.y0.empty() || grid.theta0.empty())
        throw mamr::ConfigError("sweep", "no grid given (use --y0/--theta0 or a sweep section)");
      return execute(scenario, mamr::expand_sweep(grid), sweep_opt);
    }
    if (*validate) {
      const auto scenario = load(check_common);
      std::cout << "ok: " << mamr::all_runs(scenario).size() << " run(s)\n";
      return kOk;
    }
    if (*defaults) {
      mamr::Scenario s;
      s.runs.push_back({"example", {{0.0, 0.63, 0.0}, {std::nullopt, 0.0, 0.0},
                                    mamr::ParkingMode::flc_only, 0.0}, {}, {}});
      std::cout << mamr::to_json(s).dump(2) << '\n';
      return kOk;
    }
  } catch (const mamr::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntime;
  }
  return kOk;
}
