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

#ifndef MEMCLOCK_SCHEDULE_H_
#define MEMCLOCK_SCHEDULE_H_

#include <cstdint>

namespace memclock {

enum class ScheduleKind { constant, cosine };

// constant: eta_k = eta0.
// cosine:   eta_k = eta0 * [alpha + (1 - alpha) * (1 + cos(pi k / K)) / 2].
struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double eta0 = 1e-2;
  double floor_alpha = 0.0;
  std::int64_t total_steps = 1;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

Schedule constant_schedule(double eta, std::int64_t total_steps);
Schedule cosine_schedule(double eta0, double floor_alpha, std::int64_t total_steps);

// Throws DomainError if the schedule is malformed or k lies outside [0, K].
void validate(const Schedule& schedule);
double schedule_eta(const Schedule& schedule, std::int64_t k);

}  // namespace memclock

#endif  // MEMCLOCK_SCHEDULE_H_
