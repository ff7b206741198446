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

// Runs a list of scenarios on a small worker pool. Each run gets its own seed
// derived from the global seed and its index, so results do not depend on the
// number of workers or the order in which they finish.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "mamr/scenario.hpp"
#include "mamr/simulator.hpp"

namespace mamr {

inline std::uint64_t run_seed(std::uint64_t global, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(global), static_cast<std::uint32_t>(global >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Simulation settings of one entry: run-level noise and duration replace the
/// shared ones, and the seed is derived from (sim.seed, index).
inline SimConfig sim_for_run(const SimConfig& base, const RunEntry& run, std::size_t index) {
  SimConfig sim = base;
  if (run.noise) sim.noise = *run.noise;
  if (run.duration_max) sim.duration_max = *run.duration_max;
  sim.seed = run_seed(base.seed, index);
  return sim;
}

struct RunResult {
  RunEntry run;
  TrajectoryLog log;
};

/// Called on the worker thread that finished run `index`.
using RunCallback = std::function<void(std::size_t index, const RunResult&)>;

inline std::vector<RunResult> run_batch(const Scenario& scenario, const std::vector<RunEntry>& runs,
                                        unsigned workers = 1, const RunCallback& done = {}) {
  std::vector<RunResult> results(runs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const SimConfig sim = sim_for_run(scenario.sim, runs[i], i);
        results[i] = {runs[i], run_scenario(scenario.robot, sim, scenario.controller, runs[i].spec)};
        if (done) done(i, results[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = runs.size();
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(runs.size())));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace mamr
