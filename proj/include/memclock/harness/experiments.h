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

#ifndef MEMCLOCK_HARNESS_EXPERIMENTS_H_
#define MEMCLOCK_HARNESS_EXPERIMENTS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "memclock/diagnostics.h"
#include "memclock/harness/config.h"
#include "memclock/harness/trajectory.h"
#include "memclock/ols.h"

namespace memclock::harness {

// A named pass/fail assertion evaluated by a study. The CLI exits nonzero if
// any check fails.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

nlohmann::json checks_json(const std::vector<Check>& checks);
bool all_passed(const std::vector<Check>& checks);

// Every run_* function writes its files under out_dir when out_dir is
// non-empty and returns the numbers regardless.

struct Figure7Run {
  std::string panel;      // a | b | c | d
  std::string optimizer;  // gd | sgd | adam
  double eta = 0.0;
  Sampling sampling = Sampling::full_batch;
  std::int64_t steps = 0;
  std::string file;
  TrajectoryResult result;
};

struct Figure7Result {
  std::vector<Figure7Run> runs;
  std::vector<Check> checks;
  nlohmann::json summary;
};

Figure7Result run_figure7(const ExperimentConfig& config, const std::string& out_dir = "");

struct ClockRow {
  ClockCase spec;
  std::int64_t steps = 0;  // K = E * n_train / b
  ClockReport clocks;
  double value = 0.0;      // the clock named by spec.clock
  double rel_to_quoted = 0.0;
  bool rounds_to_quoted = false;  // value rounded to the quoted precision equals it
};

struct ClockTableResult {
  std::vector<ClockRow> rows;
  std::vector<Check> checks;
  nlohmann::json summary;
};

ClockTableResult run_clock_table(const ExperimentConfig& config,
                                 const std::string& out_dir = "");

// value rounded to the number of significant digits in `quoted`.
double round_to_quoted_precision(double value, double quoted);

struct LeakagePoint {
  double eta = 0.0;
  double euclidean = 0.0;       // ||D' - D||_F after one GD step
  double preconditioned = 0.0;  // same, preconditioned GD
  double euclidean_identity_residual = 0.0;
};

struct LeakageOrderResult {
  std::vector<LeakagePoint> points;
  OrderFit euclidean_fit;
  OrderFit preconditioned_fit;
  std::vector<Check> checks;
  nlohmann::json summary;
};

LeakageOrderResult run_leakage_order(const ExperimentConfig& config,
                                     const std::string& out_dir = "");

struct DecayCase {
  std::string model;  // two_factor | deep_linear
  double d0_fro = 0.0;
  double observed_ratio = 0.0;  // <D(t), D(0)> / <D(0), D(0)>
  double predicted_ratio = 0.0;
  double rel_error = 0.0;       // ||D(t) - e^{-2 lambda t} D(0)|| / ||e^{-2 lambda t} D(0)||
};

struct ConservationCase {
  std::string model;
  std::vector<double> h;
  std::vector<double> drift;         // max_t ||D(t) - D(0)||_F
  std::vector<double> drift_ratios;  // drift[i] / drift[i + 1]
};

struct DecayCheckResult {
  std::vector<DecayCase> decay;
  std::vector<ConservationCase> conservation;
  std::vector<Check> checks;
  nlohmann::json summary;
};

DecayCheckResult run_decay_check(const ExperimentConfig& config,
                                 const std::string& out_dir = "");

struct NormLawCase {
  double a0 = 0.0;
  double b0 = 0.0;
  double d0 = 0.0;
  std::int64_t steps = 0;
  double final_loss = 0.0;
  double sq_norm = 0.0;    // a^2 + b^2 at termination
  double predicted = 0.0;  // sqrt(D0^2 + 4 p*^2)
  double rel_error = 0.0;
  bool converged = false;
};

struct NormLawResult {
  std::vector<NormLawCase> cases;
  double max_rel_error = 0.0;
  std::vector<Check> checks;
  nlohmann::json summary;
};

NormLawResult run_norm_law(const ExperimentConfig& config, const std::string& out_dir = "");

// Draws the norm-law initializations: the reference case first (if enabled),
// then uniform (a0, b0) pairs with |a0^2 - b0^2| <= max_abs_d0.
std::vector<std::pair<double, double>> norm_law_inits(const NormLawConfig& config);

struct SweepRun {
  double sigma_w = 0.0;
  std::uint64_t seed = 0;
  TrajectoryResult result;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // ordered by (sigma, seed) as listed in the config
  MemoryReport memory;
  SensitivityCurve sensitivity;
  std::vector<std::int64_t> sensitivity_steps;
  std::vector<ClockReport> sensitivity_clocks;
  std::vector<std::string> excluded;  // "sigma=..,seed=..: reason"
  std::vector<Check> checks;
  nlohmann::json summary;
};

SweepResult run_sigma_sweep(const ExperimentConfig& config, const std::string& out_dir = "");

// Final-step metric of one run, as named by config.metric.
double final_metric(const TrajectoryResult& run, const std::string& metric);

struct MinibatchPoint {
  std::size_t batch = 0;
  double estimate = 0.0;  // ||mean_B Delta D_B - Delta D_full||_F over the draws
  double exact = 0.0;     // (eta^2 / b) ||mean_i Br(G_i - G)||_F
  double estimate_doubled_eta = 0.0;  // same estimator at 2 eta, fresh draws
};

struct MinibatchResult {
  std::vector<MinibatchPoint> points;
  double full_batch_component = 0.0;  // estimator with B = all samples; exactly 0
  OlsFit fit;                         // estimate against 1/b
  double max_inverse_b_deviation = 0.0;  // max_b |b * est_b / (b0 * est_b0) - 1|
  double max_eta_deviation = 0.0;        // max_b |est(2 eta) / (4 est(eta)) - 1|
  std::vector<Check> checks;
  nlohmann::json summary;
};

MinibatchResult run_minibatch_clock(const ExperimentConfig& config,
                                    const std::string& out_dir = "");

// Dispatches on config.kind and returns the summary (with checks).
nlohmann::json run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                              std::vector<Check>* checks = nullptr);

}  // namespace memclock::harness

#endif  // MEMCLOCK_HARNESS_EXPERIMENTS_H_
