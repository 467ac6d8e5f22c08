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

#include "memclock/harness/trajectory.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "memclock/conservation.h"
#include "memclock/diagnostics.h"
#include "memclock/error.h"

namespace memclock::harness {
namespace {

constexpr std::int64_t kDenseLimit = 10000;
constexpr double kPerDecade = 60.0;

std::vector<double> flatten(const ImbalanceRecord& rec) {
  std::vector<double> out;
  for (const Matrix& m : rec.pairs) {
    const auto e = m.entries();
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

double signed_or_total(const ImbalanceRecord& rec) {
  return rec.scalar ? *rec.scalar : rec.total_frobenius();
}

}  // namespace

std::vector<std::int64_t> checkpoint_steps(std::int64_t total_steps, std::int64_t stride) {
  if (total_steps < 0) throw DomainError("checkpoint_steps: negative step count");
  if (stride < 0) throw DomainError("checkpoint_steps: negative stride");
  std::vector<std::int64_t> out;
  if (stride > 0 || total_steps <= kDenseLimit) {
    const std::int64_t s = std::max<std::int64_t>(stride, 1);
    for (std::int64_t k = 0; k <= total_steps; k += s) out.push_back(k);
  } else {
    for (std::int64_t k = 0; k <= 100; ++k) out.push_back(k);
    const double decades = std::log10(static_cast<double>(total_steps));
    for (int i = static_cast<int>(2 * kPerDecade) + 1;; ++i) {
      const double e = i / kPerDecade;
      if (e >= decades) break;
      const auto k = static_cast<std::int64_t>(std::llround(std::pow(10.0, e)));
      if (k > out.back()) out.push_back(k);
    }
  }
  if (out.back() != total_steps) out.push_back(total_steps);
  return out;
}

TrajectoryRow make_row(const ModelState& state, const QuadraticTask& task,
                       std::int64_t step, double eta, double t_sgd, double t_l2,
                       double t_adapt, double sigma_w, std::uint64_t seed) {
  TrajectoryRow row;
  row.step = step;
  row.eta = eta;
  row.loss = full_loss(state, task);
  const ImbalanceRecord rec = imbalance(state);
  row.d_entries = flatten(rec);
  row.d_fro = rec.total_frobenius();
  row.t_sgd = t_sgd;
  row.t_l2 = t_l2;
  row.t_adapt = t_adapt;
  for (const Matrix& w : parameters(state)) row.factor_norms.push_back(frobenius_norm(w));
  row.norm_total = total_norm(state);
  row.sigma_w = sigma_w;
  row.seed = seed;
  return row;
}

TrajectoryResult run_trajectory(const RunSpec& spec) {
  if (spec.steps < 0) throw DomainError("run_trajectory: negative step budget");
  Optimizer optimizer(spec.optimizer);
  const Schedule& schedule = spec.optimizer.schedule;
  if (spec.steps > schedule.total_steps) {
    throw DomainError("run_trajectory: " + std::to_string(spec.steps) +
                      " steps exceed the schedule horizon " +
                      std::to_string(schedule.total_steps));
  }
  ClockAccumulator clocks(static_cast<double>(spec.task.batch_size()), spec.optimizer.lambda);
  const std::vector<std::int64_t> keep = checkpoint_steps(spec.steps, spec.record_stride);
  std::size_t next_keep = 0;

  TrajectoryResult result;
  ModelState state = spec.init;
  validate(state);
  ImbalanceRecord d_prev = imbalance(state);
  if (d_prev.total_frobenius() < spec.threshold) result.first_below_threshold = 0;

  auto record = [&](std::int64_t k, const char* status) {
    const ClockReport c = clocks.report();
    TrajectoryRow row = make_row(state, spec.task, k, schedule_eta(schedule, k), c.t_sgd,
                                 c.t_l2, c.t_adapt, spec.sigma_w, spec.seed);
    row.status = status;
    result.rows.push_back(std::move(row));
  };

  for (std::int64_t k = 0;; ++k) {
    if (next_keep < keep.size() && keep[next_keep] == k) {
      record(k, "ok");
      ++next_keep;
    }
    if (k == spec.steps) break;
    try {
      StepResult step = optimizer.step(state, spec.task, k);
      clocks.add(step.record.eta);
      state = std::move(step.state);
    } catch (const DivergenceError& e) {
      result.status = "diverged";
      result.failure = e.what();
    } catch (const NumericError& e) {
      result.status = "diverged";
      result.failure = e.what();
    }
    if (result.status != "ok") {
      // The last finite state, tagged with the step that failed.
      if (result.rows.empty() || result.rows.back().step != k) record(k, "diverged");
      else result.rows.back().status = "diverged";
      result.steps_run = k;
      break;
    }
    const ImbalanceRecord d_now = imbalance(state);
    double delta = 0.0;
    for (std::size_t j = 0; j < d_now.pairs.size(); ++j) {
      delta += squared_frobenius_norm(d_now.pairs[j] - d_prev.pairs[j]);
    }
    result.last_delta_d = std::sqrt(delta);
    if (!result.first_below_threshold && d_now.total_frobenius() < spec.threshold) {
      result.first_below_threshold = k + 1;
    }
    d_prev = d_now;
    result.steps_run = k + 1;
  }

  result.final_state = state;
  result.final_loss = full_loss(state, spec.task);
  result.final_d = signed_or_total(d_prev);
  result.final_norm = total_norm(state);
  return result;
}

}  // namespace memclock::harness
