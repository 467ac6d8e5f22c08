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

#ifndef MEMCLOCK_HARNESS_IDENTITY_SUITE_H_
#define MEMCLOCK_HARNESS_IDENTITY_SUITE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "memclock/harness/experiments.h"

namespace memclock::harness {

struct IdentitySuiteOptions {
  std::uint64_t seed = 1;
  std::size_t trajectories_per_family = 25;
  std::int64_t steps_per_trajectory = 40;
  double tolerance = 1e-10;
};

// Residuals are max over pairs of ||D' - predicted D'||_F / (1 + ||D||_F).
struct IdentityFamily {
  std::string name;
  std::size_t steps = 0;
  double max_normalized_residual = 0.0;
};

struct IdentitySuiteResult {
  std::vector<IdentityFamily> families;
  std::size_t total_steps = 0;
  double max_normalized_residual = 0.0;
  double seconds = 0.0;
  std::vector<Check> checks;
  nlohmann::json summary;
};

// Random two-factor states (up to 8x4x8) and deep-linear states (L = 2, 3, 4)
// stepped by minibatch SGD, coupled weight decay, diagonal preconditioning,
// momentum and Adam. Every step's imbalance change is checked against its
// exact finite-step identity.
IdentitySuiteResult run_identity_suite(const IdentitySuiteOptions& options = {});

}  // namespace memclock::harness

#endif  // MEMCLOCK_HARNESS_IDENTITY_SUITE_H_
