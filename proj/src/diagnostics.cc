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

#include "memclock/diagnostics.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "memclock/error.h"
#include "memclock/ols.h"

namespace memclock {

ClockAccumulator::ClockAccumulator(double batch, double lambda)
    : batch_(batch), lambda_(lambda) {
  if (!(batch >= 1.0)) throw DomainError("clocks: batch size must be >= 1");
  if (!(lambda >= 0.0)) throw DomainError("clocks: lambda must be >= 0");
}

void ClockAccumulator::add(double eta) {
  sum_eta_ += eta;
  sum_eta_sq_ += eta * eta;
}

ClockReport ClockAccumulator::report() const {
  return {sum_eta_sq_ / batch_, lambda_ * sum_eta_, sum_eta_};
}

ClockReport compute_clocks(const Schedule& schedule, double batch, double lambda,
                           std::int64_t k) {
  validate(schedule);
  if (k < 0 || k > schedule.total_steps) {
    throw DomainError("compute_clocks: K = " + std::to_string(k) + " outside [0, " +
                      std::to_string(schedule.total_steps) + "]");
  }
  ClockAccumulator acc(batch, lambda);
  for (std::int64_t j = 0; j < k; ++j) acc.add(schedule_eta(schedule, j));
  return acc.report();
}

MemoryReport memory_metric(std::span<const SigmaSample> runs, std::string metric) {
  if (runs.empty()) throw DomainError("memory_metric: empty sigma set");
  std::vector<SigmaSample> sorted(runs.begin(), runs.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SigmaSample& a, const SigmaSample& b) { return a.sigma < b.sigma; });

  MemoryReport report;
  report.metric = std::move(metric);
  for (SigmaSample& s : sorted) {
    if (s.values.empty()) {
      throw DomainError("memory_metric: sigma " + std::to_string(s.sigma) + " has no runs");
    }
    std::sort(s.values.begin(), s.values.end());
    double sum = 0.0;
    for (double v : s.values) sum += v;
    report.sigma_values.push_back(s.sigma);
    report.means.push_back(sum / static_cast<double>(s.values.size()));
  }
  const auto [lo, hi] = std::minmax_element(report.means.begin(), report.means.end());
  report.spread = *hi - *lo;
  return report;
}

SensitivityCurve sensitivity_curve(std::span<const SigmaSeries> sweep,
                                   std::span<const double> clock) {
  if (sweep.empty()) throw DomainError("sensitivity_curve: empty sweep");
  const std::size_t length = sweep.front().series.size();
  for (const SigmaSeries& s : sweep) {
    if (s.series.size() != length) {
      throw ShapeError("sensitivity_curve: series lengths differ (" +
                       std::to_string(s.series.size()) + " vs " + std::to_string(length) +
                       ")");
    }
  }
  if (!clock.empty() && clock.size() != length) {
    throw ShapeError("sensitivity_curve: clock has " + std::to_string(clock.size()) +
                     " entries for " + std::to_string(length) + " checkpoints");
  }

  std::vector<double> sigmas;
  for (const SigmaSeries& s : sweep) sigmas.push_back(s.sigma);
  SensitivityCurve curve;
  curve.clock.assign(clock.begin(), clock.end());
  std::vector<double> ys(sweep.size());
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t i = 0; i < sweep.size(); ++i) ys[i] = sweep[i].series[t];
    curve.abs_beta.push_back(ols_fit(sigmas, ys).abs_slope);
  }
  return curve;
}

OrderFit order_fit(std::span<const double> etas, std::span<const double> deltas) {
  if (etas.size() != deltas.size()) throw ShapeError("order_fit: length mismatch");
  if (etas.size() < 4) throw DomainError("order_fit: need at least four points");
  std::vector<double> log_eta;
  std::vector<double> log_delta;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0) || !(deltas[i] > 0.0)) {
      throw DomainError("order_fit: etas and deltas must be positive");
    }
    log_eta.push_back(std::log(etas[i]));
    log_delta.push_back(std::log(deltas[i]));
  }
  const OlsFit fit = ols_fit(log_eta, log_delta);
  const boost::math::students_t dist(static_cast<double>(fit.n - 2));
  const double t_quantile = boost::math::quantile(dist, 0.975);
  return {fit.slope, fit.intercept, t_quantile * fit.slope_stderr};
}

}  // namespace memclock
