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

#ifndef MEMCLOCK_FLOW_H_
#define MEMCLOCK_FLOW_H_

#include <cstddef>
#include <vector>

#include "memclock/conservation.h"
#include "memclock/models.h"

namespace memclock {

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<ImbalanceRecord> imbalances;  // aligned with times
  ModelState final_state;
};

// Classical fourth-order Runge-Kutta for the decayed gradient flow
//   dW_j/dt = -H_j(W) - lambda W_j
// on the full-batch loss of `task`. Steps have size h except the last, which
// is shortened to land on t_end. D_j is recorded at t = 0, every
// `record_every` steps and at t_end. Throws DomainError for h <= 0 or
// t_end < 0, DivergenceError (carrying the time) when a factor norm passes
// kBlowUpNorm.
FlowTrajectory flow_integrate(const ModelState& state, const QuadraticTask& task,
                              double lambda, double t_end, double h,
                              std::size_t record_every = 1);

}  // namespace memclock

#endif  // MEMCLOCK_FLOW_H_
