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

#include <gtest/gtest.h>

#include "memclock/error.h"

namespace memclock {
namespace {

TEST(ScheduleTest, ConstantIsFlat) {
  const Schedule s = constant_schedule(1e-3, 100);
  EXPECT_EQ(schedule_eta(s, 0), 1e-3);
  EXPECT_EQ(schedule_eta(s, 57), 1e-3);
  EXPECT_EQ(schedule_eta(s, 100), 1e-3);
}

TEST(ScheduleTest, CosineEndpointsAndMidpoint) {
  const Schedule s = cosine_schedule(1e-3, 0.01, 1000);
  EXPECT_DOUBLE_EQ(schedule_eta(s, 0), 1e-3);
  EXPECT_NEAR(schedule_eta(s, 1000), 1e-5, 1e-18);
  // 1e-3 * (0.01 + 0.99 * 0.5)
  EXPECT_NEAR(schedule_eta(s, 500), 5.05e-4, 1e-15);
}

TEST(ScheduleTest, CosineMatchesFormulaAndIsMonotone) {
  const Schedule s = cosine_schedule(0.1, 0.2, 37);
  double prev = schedule_eta(s, 0);
  for (int k = 1; k <= 37; ++k) {
    const double expect =
        0.1 * (0.2 + 0.8 * 0.5 * (1.0 + std::cos(std::numbers::pi * k / 37.0)));
    EXPECT_NEAR(schedule_eta(s, k), expect, 1e-15);
    EXPECT_LE(schedule_eta(s, k), prev);
    prev = schedule_eta(s, k);
  }
}

TEST(ScheduleTest, Errors) {
  const Schedule s = constant_schedule(1e-2, 10);
  EXPECT_THROW(schedule_eta(s, -1), DomainError);
  EXPECT_THROW(schedule_eta(s, 11), DomainError);
  EXPECT_THROW(validate(constant_schedule(-1.0, 10)), DomainError);
  EXPECT_THROW(validate(constant_schedule(1e-2, 0)), DomainError);
  EXPECT_THROW(schedule_eta(cosine_schedule(1e-2, 1.5, 10), 0), DomainError);
}

}  // namespace
}  // namespace memclock
