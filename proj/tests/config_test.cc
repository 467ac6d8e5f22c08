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

#include "memclock/harness/config.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "memclock/error.h"

namespace memclock::harness {
namespace {

TEST(ConfigTest, DefaultsRoundTrip) {
  for (ExperimentKind kind :
       {ExperimentKind::figure7, ExperimentKind::clock_table, ExperimentKind::leakage_order,
        ExperimentKind::decay_check, ExperimentKind::norm_law, ExperimentKind::sigma_sweep,
        ExperimentKind::minibatch_clock}) {
    const ExperimentConfig c = default_config(kind);
    EXPECT_EQ(parse_config(dump_config(c)), c) << kind_name(kind);
  }
}

TEST(ConfigTest, EditedConfigRoundTrips) {
  ExperimentConfig c = default_config(ExperimentKind::sigma_sweep);
  c.model = {ModelKind::deep_linear, {5, 4, 4, 3}, 1.0, 6.0};
  c.task.sampling = Sampling::seeded_uniform;
  c.task.batch_size = 4;
  c.task.noise = 0.123456789012345678;
  c.optimizer.algorithm = Algorithm::adam;
  c.optimizer.schedule = cosine_schedule(3e-3, 0.1, 500);
  c.optimizer.lambda = 1e-4;
  c.optimizer.preconditioner = {1.5, 0.25};
  c.sigma_grid = {0.1, 1.0 / 3.0, 10.0};
  c.seeds = {18446744073709551615ull, 0, 42};
  c.steps = 500;
  c.output_dir = "out/dir with space";
  c.record_stride = 7;
  c.threads = 3;
  c.metric = "final_loss";
  c.figure7.etas = {0.02};
  c.clock_table.cases.push_back({"extra", 1.5, 3, 0.1, 0.01, "t_adapt", 5.0});
  c.norm_law.include_reference_case = false;
  c.decay.conservation_h = {1e-3};
  ExperimentConfig back = parse_config(dump_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_from_json(to_json(c)), c);
}

TEST(ConfigTest, MissingFieldsTakeDefaults) {
  const ExperimentConfig c = parse_config(R"({"kind": "figure7", "steps": 12,
    // comments are allowed
    "optimizer": {"algorithm": "sgd"}})");
  EXPECT_EQ(c.kind, ExperimentKind::figure7);
  EXPECT_EQ(c.steps, 12);
  EXPECT_EQ(c.optimizer.algorithm, Algorithm::sgd);
  EXPECT_EQ(c.optimizer.schedule, ExperimentConfig::default_sweep_optimizer().schedule);
  EXPECT_EQ(c.figure7, Figure7Config{});
  EXPECT_EQ(parse_config("{}"), ExperimentConfig{});
}

TEST(ConfigTest, RejectsTyposAndBadValues) {
  EXPECT_THROW(parse_config(R"({"stpes": 3})"), DomainError);
  EXPECT_THROW(parse_config(R"({"model": {"kind": "triple_factor"}})"), DomainError);
  EXPECT_THROW(parse_config(R"({"steps": "many"})"), DomainError);
  EXPECT_THROW(parse_config(R"({"figure7": {"etaz": [1]}})"), DomainError);
  EXPECT_THROW(parse_config("{not json"), DomainError);
  EXPECT_THROW(parse_config("[]"), DomainError);
}

TEST(ConfigTest, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  c.steps = 0;
  EXPECT_THROW(validate(c), DomainError);
  c = ExperimentConfig{};
  c.sigma_grid = {1.0};
  EXPECT_THROW(validate(c), DomainError);
  c = ExperimentConfig{};
  c.metric = "accuracy";
  EXPECT_THROW(validate(c), DomainError);
  c = ExperimentConfig{};
  c.optimizer.lambda = -1.0;
  EXPECT_THROW(validate(c), DomainError);
}

TEST(ConfigTest, EffectiveOptimizerFillsHorizon) {
  ExperimentConfig c;
  c.steps = 321;
  EXPECT_EQ(effective_optimizer(c).schedule.total_steps, 321);
  c.optimizer.schedule.total_steps = 1000;
  EXPECT_EQ(effective_optimizer(c).schedule.total_steps, 1000);
}

TEST(ConfigTest, PartialScheduleFollowsSteps) {
  const ExperimentConfig c = parse_config(
      R"({"steps": 50, "optimizer": {"schedule": {"kind": "cosine", "floor_alpha": 0.1}}})");
  EXPECT_EQ(c.optimizer.schedule.total_steps, 0);
  EXPECT_EQ(effective_optimizer(c).schedule.total_steps, 50);
}

TEST(ConfigTest, LoadFromFile) {
  const auto dir = std::filesystem::temp_directory_path() / "memclock_config_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "c.json").string();
  ExperimentConfig c = default_config(ExperimentKind::norm_law);
  c.norm_law.cases = 3;
  {
    std::ofstream out(path);
    out << dump_config(c);
  }
  EXPECT_EQ(load_config(path), c);
  try {
    load_config((dir / "missing.json").string());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), (dir / "missing.json").string());
  }
}

TEST(ConfigTest, BuildTask) {
  ExperimentConfig c;
  c.model = {ModelKind::two_factor, {3, 2, 5}, 1.0, 6.0};
  c.task.samples = 9;
  const QuadraticTask t = build_task(c, 0);
  EXPECT_FALSE(t.is_scalar());
  EXPECT_EQ(t.inputs().rows(), 3u);
  EXPECT_EQ(t.targets().rows(), 5u);
  EXPECT_EQ(t.sample_count(), 9u);
  c.model.kind = ModelKind::scalar;
  c.task.scalar_targets = {0, 1, 2};
  c.task.sampling = Sampling::cyclic;
  c.task.batch_size = 1;
  const QuadraticTask s = build_task(c, 0);
  EXPECT_TRUE(s.is_scalar());
  EXPECT_EQ(s.select_batch(4), (Batch{1}));
}

}  // namespace
}  // namespace memclock::harness
