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

#ifndef MEMCLOCK_OLS_H_
#define MEMCLOCK_OLS_H_

#include <cstddef>
#include <span>

namespace memclock {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double abs_slope = 0.0;
  // Standard error of the slope; zero when n == 2.
  double slope_stderr = 0.0;
  std::size_t n = 0;
};

// Least-squares line through (xs, ys), computed from centered sums.
// Throws ShapeError on length mismatch or n < 2, DomainError when all
// abscissae coincide.
OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace memclock

#endif  // MEMCLOCK_OLS_H_
