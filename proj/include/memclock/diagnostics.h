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

#ifndef MEMCLOCK_DIAGNOSTICS_H_
#define MEMCLOCK_DIAGNOSTICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memclock/schedule.h"

namespace memclock {

// Cumulative optimizer clocks over the first K updates:
//   t_sgd   = (1/b) sum_{k<K} eta_k^2
//   t_l2    = lambda sum_{k<K} eta_k
//   t_adapt = sum_{k<K} eta_k
struct ClockReport {
  double t_sgd = 0.0;
  double t_l2 = 0.0;
  double t_adapt = 0.0;
};

// Running version of compute_clocks. Feeding eta_0 ... eta_{K-1} in order
// reproduces compute_clocks(.., K) bit for bit.
class ClockAccumulator {
 public:
  ClockAccumulator(double batch, double lambda);
  void add(double eta);
  ClockReport report() const;

 private:
  double batch_;
  double lambda_;
  double sum_eta_ = 0.0;
  double sum_eta_sq_ = 0.0;
};

// Throws DomainError for K outside [0, schedule.total_steps], b < 1 or
// lambda < 0.
ClockReport compute_clocks(const Schedule& schedule, double batch, double lambda,
                           std::int64_t k);

struct SigmaSample {
  double sigma = 0.0;
  std::vector<double> values;  // one metric value per seed
};

struct MemoryReport {
  std::string metric;
  std::vector<double> sigma_values;  // ascending
  std::vector<double> means;         // seed means, aligned with sigma_values
  double spread = 0.0;               // max - min of means
};

// Mem_m = max_sigma E_s[m] - min_sigma E_s[m]. Seed means are summed in sorted
// order, so the result does not depend on the order of sigmas or seeds.
// Throws DomainError for an empty sweep or a sigma without values.
MemoryReport memory_metric(std::span<const SigmaSample> runs, std::string metric = "");

struct SigmaSeries {
  double sigma = 0.0;
  std::vector<double> series;  // metric per checkpoint
};

struct SensitivityCurve {
  std::vector<double> abs_beta;  // |d metric / d sigma| per checkpoint
  std::vector<double> clock;     // clock value per checkpoint, if supplied
};

// OLS slope of the metric against sigma at every checkpoint. Throws
// ShapeError for ragged series (or a clock of the wrong length) and
// DomainError for fewer than two distinct sigmas.
SensitivityCurve sensitivity_curve(std::span<const SigmaSeries> sweep,
                                   std::span<const double> clock = {});

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  // 95% Student-t half-width from the fit residuals.
  double half_width = 0.0;
};

// Slope of log|delta| against log eta. Needs >= 4 strictly positive points.
OrderFit order_fit(std::span<const double> etas, std::span<const double> deltas);

}  // namespace memclock

#endif  // MEMCLOCK_DIAGNOSTICS_H_
