// Copyright 2026 The memclock Authors. All Rights Reserved.
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

#ifndef MEMCLOCK_HARNESS_TRAJECTORY_H_
#define MEMCLOCK_HARNESS_TRAJECTORY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memclock/models.h"
#include "memclock/optimizers.h"

namespace memclock::harness {

// State after `step` updates. eta is the rate the next update would use and
// the clocks sum over the updates already taken, so they equal
// compute_clocks(schedule, b, lambda, step).
struct TrajectoryRow {
  std::int64_t step = 0;
  double eta = 0.0;
  double loss = 0.0;
  std::vector<double> d_entries;  // every imbalance pair, row-major, in pair order
  double d_fro = 0.0;
  double t_sgd = 0.0;
  double t_l2 = 0.0;
  double t_adapt = 0.0;
  std::vector<double> factor_norms;
  double norm_total = 0.0;
  double sigma_w = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | diverged

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

// Steps 0..K at which rows are kept. stride > 0 keeps every stride-th step;
// stride 0 keeps every step up to 1e4 steps and about 60 log-spaced steps per
// decade beyond. The final step is always kept.
std::vector<std::int64_t> checkpoint_steps(std::int64_t total_steps, std::int64_t stride);

struct RunSpec {
  ModelState init;
  QuadraticTask task = QuadraticTask::scalar({0.0});
  OptimizerSpec optimizer;
  std::int64_t steps = 0;
  std::int64_t record_stride = 0;
  double sigma_w = 0.0;
  std::uint64_t seed = 0;
  double threshold = 0.5;  // reported: first step with |D|_F below this
};

struct TrajectoryResult {
  std::vector<TrajectoryRow> rows;
  ModelState final_state;
  std::string status = "ok";
  std::string failure;  // message of the error that stopped a diverged run
  std::int64_t steps_run = 0;
  std::optional<std::int64_t> first_below_threshold;
  double last_delta_d = 0.0;  // ||D_K - D_{K-1}||_F
  double final_loss = 0.0;
  double final_d = 0.0;  // signed D for the scalar model, ||D||_F otherwise
  double final_norm = 0.0;
};

TrajectoryRow make_row(const ModelState& state, const QuadraticTask& task,
                       std::int64_t step, double eta, double t_sgd, double t_l2,
                       double t_adapt, double sigma_w, std::uint64_t seed);

// Runs the optimizer for spec.steps updates. Divergence does not throw: the
// run stops, a row with status "diverged" is appended and the result is
// marked failed.
TrajectoryResult run_trajectory(const RunSpec& spec);

}  // namespace memclock::harness

#endif  // MEMCLOCK_HARNESS_TRAJECTORY_H_
