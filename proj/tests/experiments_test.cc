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

#include "memclock/harness/experiments.h"

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "memclock/error.h"
#include "memclock/harness/identity_suite.h"
#include "memclock/harness/output.h"

namespace memclock::harness {
namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("memclock_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig sweep_config(double eta, double lambda, std::int64_t steps) {
  ExperimentConfig c = default_config(ExperimentKind::sigma_sweep);
  c.optimizer.algorithm = lambda > 0.0 ? Algorithm::gd_weight_decay : Algorithm::gd;
  c.optimizer.lambda = lambda;
  c.optimizer.schedule = constant_schedule(eta, steps);
  c.steps = steps;
  return c;
}

TEST(ClockTableTest, ReproducesTimescaleArithmetic) {
  const ClockTableResult r = run_clock_table(default_config(ExperimentKind::clock_table));
  ASSERT_EQ(r.rows.size(), 5u);
  const double expect[] = {7.32421875e-4, 1.220703125e-2, 4.6875, 0.9375, 4.6875};
  const std::int64_t steps[] = {93750, 1562500, 750000, 93750, 93750};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.rows[i].steps, steps[i]);
    EXPECT_NEAR(r.rows[i].value, expect[i], 1e-9 * expect[i]);  // summed step by step
    EXPECT_TRUE(r.rows[i].rounds_to_quoted) << r.rows[i].spec.label;
  }
  EXPECT_TRUE(all_passed(r.checks));
}

TEST(ClockTableTest, RoundingToQuotedPrecision) {
  EXPECT_EQ(round_to_quoted_precision(1.220703125e-2, 1.2e-2), 1.2e-2);
  EXPECT_EQ(round_to_quoted_precision(0.9375, 0.94), 0.94);
  EXPECT_EQ(round_to_quoted_precision(7.32421875e-4, 7.3e-4), 7.3e-4);
  EXPECT_NE(round_to_quoted_precision(1.26e-2, 1.2e-2), 1.2e-2);
}

TEST(Figure7Test, DefaultPanelsAndCaptionRanges) {
  ExperimentConfig c = default_config(ExperimentKind::figure7);
  c.figure7.minibatch_adam_steps = 0;  // covered by the acceptance run
  const Figure7Result r = run_figure7(c);
  ASSERT_EQ(r.runs.size(), 6u);
  for (const Figure7Run& run : r.runs) EXPECT_EQ(run.result.status, "ok");
  EXPECT_TRUE(all_passed(r.checks)) << r.summary["checks"].dump();
  // Panel (a) at eta = 0.01 after 20 steps, hand-checkable start: (1, 6) -> (0.4, 5.9).
  EXPECT_NEAR(r.runs[0].result.rows[1].d_entries[0], 0.16 - 34.81, 1e-12);
}

TEST(Figure7Test, FlowLimitKeepsImbalance) {
  ExperimentConfig c = default_config(ExperimentKind::figure7);
  c.figure7.etas = {1e-4};
  c.figure7.gd_steps = 2000;  // same flow time as 20 steps at 1e-2
  c.figure7.sgd_steps = c.figure7.adam_steps = c.figure7.minibatch_adam_steps = 0;
  const Figure7Result r = run_figure7(c);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_LT(std::abs(r.runs[0].result.final_d + 35.0), 0.01 * 35.0);
}

TEST(LeakageTest, SlopesOnFixedState) {
  const LeakageOrderResult r = run_leakage_order(default_config(ExperimentKind::leakage_order));
  ASSERT_EQ(r.points.size(), 8u);
  EXPECT_NEAR(r.points.front().eta, 1e-5, 1e-20);
  EXPECT_NEAR(r.points.back().eta, 1e-3, 1e-18);
  EXPECT_NEAR(r.euclidean_fit.slope, 2.0, 0.1);
  EXPECT_NEAR(r.preconditioned_fit.slope, 1.0, 0.1);
  for (const LeakagePoint& p : r.points) EXPECT_LT(p.euclidean_identity_residual, 1e-14);
}

TEST(DecayTest, FlowStudies) {
  const DecayCheckResult r = run_decay_check(default_config(ExperimentKind::decay_check));
  ASSERT_EQ(r.decay.size(), 2u);
  for (const DecayCase& c : r.decay) {
    EXPECT_NEAR(c.observed_ratio, std::exp(-1.0), 1e-6);
    EXPECT_LT(c.rel_error, 1e-6);
  }
  for (const ConservationCase& c : r.conservation) {
    ASSERT_EQ(c.drift_ratios.size(), 2u);
    for (double ratio : c.drift_ratios) EXPECT_GT(ratio, 8.0);
  }
}

TEST(NormLawTest, ErrorShrinksLinearlyWithEta) {
  ExperimentConfig c = default_config(ExperimentKind::norm_law);
  c.norm_law.cases = 1;  // the (1, 6) reference case
  c.norm_law.eta = 1e-3;
  const double coarse = run_norm_law(c).max_rel_error;
  c.norm_law.eta = 5e-4;
  const NormLawResult fine = run_norm_law(c);
  EXPECT_TRUE(fine.cases[0].converged);
  EXPECT_EQ(fine.cases[0].d0, -35.0);
  EXPECT_NEAR(coarse / fine.max_rel_error, 2.0, 0.1);
}

TEST(NormLawTest, NearBalancedProductsMatchClosely) {
  // Starting close to the solution manifold leaves GD almost no room to drift.
  ExperimentConfig c = default_config(ExperimentKind::norm_law);
  c.norm_law.include_reference_case = false;
  c.norm_law.cases = 5;
  c.norm_law.min_factor = 0.9;
  c.norm_law.max_factor = 1.1;
  const NormLawResult r = run_norm_law(c);
  for (const NormLawCase& k : r.cases) EXPECT_TRUE(k.converged);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(NormLawTest, InitsRespectBound) {
  NormLawConfig n;
  n.cases = 50;
  const auto inits = norm_law_inits(n);
  ASSERT_EQ(inits.size(), 50u);
  EXPECT_EQ(inits.front(), (std::pair<double, double>{1.0, 6.0}));
  for (const auto& [a, b] : inits) EXPECT_LE(std::abs(a * a - b * b), n.max_abs_d0);
}

TEST(SweepTest, FlowLikeGdRemembersInitialization) {
  const SweepResult r = run_sigma_sweep(sweep_config(1e-4, 0.0, 2000));
  ASSERT_EQ(r.runs.size(), 9u);
  EXPECT_GT(r.memory.spread, 0.0);
  for (const SweepRun& run : r.runs) {
    const double d0 = run.result.rows.front().d_fro;
    EXPECT_LT(std::abs(run.result.final_d - d0), 1e-3 * d0);
  }
  EXPECT_EQ(r.sensitivity.abs_beta.size(), r.sensitivity_steps.size());
  for (double b : r.sensitivity.abs_beta) EXPECT_GE(b, 0.0);
}

TEST(SweepTest, CoupledDecayErasesMemory) {
  const SweepResult plain = run_sigma_sweep(sweep_config(1e-2, 0.0, 20000));
  const SweepResult decayed = run_sigma_sweep(sweep_config(1e-2, 0.1, 20000));
  ASSERT_GT(plain.memory.spread, 0.0);
  EXPECT_LE(decayed.memory.spread * 10.0, plain.memory.spread);
}

TEST(SweepTest, ThreadCountDoesNotChangeOutput) {
  ExperimentConfig c = sweep_config(1e-2, 0.0, 300);
  c.task.sampling = Sampling::seeded_uniform;
  c.task.batch_size = 4;
  c.optimizer.algorithm = Algorithm::sgd;
  const auto one = fresh_dir("sweep_t1"), four = fresh_dir("sweep_t4");
  c.threads = 1;
  run_sigma_sweep(c, one.string());
  c.threads = 4;
  run_sigma_sweep(c, four.string());
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(one)) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(read_text(entry.path().string()),
              read_text((four / entry.path().filename()).string()))
        << entry.path().filename();
    ++compared;
  }
  EXPECT_EQ(compared, 9u * 2u + 2u);  // runs + details, sensitivity, memory
}

TEST(SweepTest, DivergedRunsAreExcludedAndReported) {
  ExperimentConfig c = sweep_config(1e-2, 0.0, 500);
  c.sigma_grid = {0.5, 1.0, 1e5};
  const SweepResult r = run_sigma_sweep(c);
  EXPECT_EQ(r.excluded.size(), 3u);
  EXPECT_EQ(r.memory.sigma_values, (std::vector<double>{0.5, 1.0}));
  int diverged = 0;
  for (const auto& run : r.summary["per_run"]) diverged += run["status"] == "diverged";
  EXPECT_EQ(diverged, 3);
  EXPECT_EQ(r.runs.back().result.rows.back().status, "diverged");
}

TEST(SweepTest, RepeatedSigmaHasNoSpread) {
  ExperimentConfig c = sweep_config(1e-2, 0.0, 100);
  c.sigma_grid = {1.0, 1.0};
  const SweepResult r = run_sigma_sweep(c);
  EXPECT_EQ(r.memory.spread, 0.0);
}

TEST(SweepTest, SummaryEchoesConfig) {
  ExperimentConfig c = sweep_config(1e-2, 0.0, 50);
  c.seeds = {4};
  const auto dir = fresh_dir("sweep_summary");
  const nlohmann::json s = run_experiment(c, dir.string());
  EXPECT_EQ(config_from_json(s["config"]), c);
  EXPECT_TRUE(s.contains("git_describe"));
  EXPECT_TRUE(s["mem_spread"].is_number());
  ASSERT_EQ(s["per_run"].size(), 3u);
  for (const char* key : {"sigma_w", "seed", "final_loss", "final_d", "final_norm", "status"}) {
    EXPECT_TRUE(s["per_run"][0].contains(key)) << key;
  }
  const nlohmann::json on_disk =
      nlohmann::json::parse(read_text((dir / "sweep_summary.json").string()));
  EXPECT_EQ(config_from_json(on_disk["config"]), c);
}

TEST(MinibatchTest, InverseBatchAndEtaSquaredScaling) {
  const MinibatchResult r = run_minibatch_clock(default_config(ExperimentKind::minibatch_clock));
  ASSERT_EQ(r.points.size(), 5u);
  EXPECT_EQ(r.full_batch_component, 0.0);
  EXPECT_LT(r.max_inverse_b_deviation, 0.25);
  EXPECT_LT(r.max_eta_deviation, 0.25);
  for (const MinibatchPoint& p : r.points) EXPECT_NEAR(p.estimate / p.exact, 1.0, 0.25);
  EXPECT_GT(r.fit.slope, 0.0);
}

TEST(MinibatchTest, Errors) {
  ExperimentConfig c = default_config(ExperimentKind::minibatch_clock);
  c.minibatch.draws = 1;
  EXPECT_THROW(run_minibatch_clock(c), DomainError);
  c = default_config(ExperimentKind::minibatch_clock);
  c.minibatch.samples = 16;
  EXPECT_THROW(run_minibatch_clock(c), DomainError);
  c = default_config(ExperimentKind::minibatch_clock);
  c.model.kind = ModelKind::scalar;
  EXPECT_THROW(run_minibatch_clock(c), DomainError);
}

TEST(IdentitySuiteTest, ResidualsStayAtRoundoff) {
  IdentitySuiteOptions o;
  o.trajectories_per_family = 4;
  o.steps_per_trajectory = 10;
  const IdentitySuiteResult r = run_identity_suite(o);
  EXPECT_EQ(r.families.size(), 6u);
  EXPECT_EQ(r.total_steps, 6u * 40u);
  EXPECT_LT(r.max_normalized_residual, 1e-12);
}

}  // namespace
}  // namespace memclock::harness
