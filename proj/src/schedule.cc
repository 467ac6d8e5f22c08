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

#include "memclock/schedule.h"

#include <cmath>
#include <numbers>
#include <string>

#include "memclock/error.h"

namespace memclock {

Schedule constant_schedule(double eta, std::int64_t total_steps) {
  return Schedule{ScheduleKind::constant, eta, 0.0, total_steps};
}

Schedule cosine_schedule(double eta0, double floor_alpha, std::int64_t total_steps) {
  return Schedule{ScheduleKind::cosine, eta0, floor_alpha, total_steps};
}

void validate(const Schedule& schedule) {
  if (!(schedule.eta0 > 0.0) || !std::isfinite(schedule.eta0)) {
    throw DomainError("Schedule: eta0 must be positive");
  }
  if (schedule.total_steps < 1) throw DomainError("Schedule: total_steps must be >= 1");
  if (schedule.kind == ScheduleKind::cosine &&
      !(schedule.floor_alpha >= 0.0 && schedule.floor_alpha <= 1.0)) {
    throw DomainError("Schedule: cosine floor alpha must lie in [0, 1]");
  }
}

double schedule_eta(const Schedule& schedule, std::int64_t k) {
  validate(schedule);
  if (k < 0 || k > schedule.total_steps) {
    throw DomainError("schedule_eta: step " + std::to_string(k) + " outside [0, " +
                      std::to_string(schedule.total_steps) + "]");
  }
  if (schedule.kind == ScheduleKind::constant) return schedule.eta0;
  const double phase = std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(schedule.total_steps);
  const double alpha = schedule.floor_alpha;
  return schedule.eta0 * (alpha + (1.0 - alpha) * 0.5 * (1.0 + std::cos(phase)));
}

}  // namespace memclock
