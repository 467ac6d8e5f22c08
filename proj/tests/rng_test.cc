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

#include "memclock/rng.h"

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "memclock/error.h"

namespace memclock {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, CounterBasedAccessMatchesSequence) {
  Rng r(99);
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(r.next_u64(), Rng::at(99, i));
  EXPECT_EQ(r.counter(), 50u);
}

TEST(RngTest, DistinctSeedsAndStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(Rng(s).next_u64());
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(Rng::derive(5, 0), Rng::derive(5, 1));
  EXPECT_EQ(Rng::derive(5, 3), Rng::derive(5, 3));
}

TEST(RngTest, UniformRanges) {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open_zero();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RngTest, NormalMomentsFromSamples) {
  Rng r(2024);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = (sum_sq - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(RngTest, BelowIsRoughlyUniform) {
  Rng r(3);
  const std::size_t k = 7;
  const int n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) ++counts[r.below(k)];
  // Chi-square with 6 degrees of freedom; 22.5 is the 0.999 quantile.
  double chi = 0.0;
  const double expect = static_cast<double>(n) / k;
  for (int c : counts) chi += (c - expect) * (c - expect) / expect;
  EXPECT_LT(chi, 22.5);
  EXPECT_THROW(r.below(0), DomainError);
  EXPECT_EQ(r.below(1), 0u);
}

}  // namespace
}  // namespace memclock
