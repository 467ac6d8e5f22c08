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

#include "memclock/ols.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "memclock/error.h"
#include "memclock/rng.h"

namespace memclock {
namespace {

TEST(OlsTest, ExactLine) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {1, 3, 5, 7};
  const OlsFit fit = ols_fit(x, y);
  EXPECT_NEAR(fit.slope, 2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
  EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-14);
  EXPECT_EQ(fit.n, 4u);
}

// Normal equations [n, Sx; Sx, Sxx] [c; m] = [Sy; Sxy] solved by Cramer's rule.
TEST(OlsTest, MatchesNormalEquations) {
  Rng rng(11);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform() * 10.0);
    y.push_back(-0.7 * x.back() + 3.0 + rng.normal());
  }
  double n = 50, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 50; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sxx * sy - sx * sxy) / det;
  const OlsFit fit = ols_fit(x, y);
  EXPECT_NEAR(fit.slope, slope, 1e-10);
  EXPECT_NEAR(fit.intercept, intercept, 1e-10);
  EXPECT_DOUBLE_EQ(fit.abs_slope, std::abs(fit.slope));
  EXPECT_GT(fit.slope_stderr, 0.0);
}

TEST(OlsTest, Errors) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(ols_fit(one, one), ShapeError);
  const std::vector<double> a = {1, 2, 3}, b = {1, 2};
  EXPECT_THROW(ols_fit(a, b), ShapeError);
  const std::vector<double> flat = {2, 2, 2};
  EXPECT_THROW(ols_fit(flat, a), DomainError);
}

}  // namespace
}  // namespace memclock
