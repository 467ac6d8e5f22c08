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

#ifndef MEMCLOCK_HARNESS_CONFIG_H_
#define MEMCLOCK_HARNESS_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "memclock/models.h"
#include "memclock/optimizers.h"

namespace memclock::harness {

enum class ExperimentKind {
  figure7,
  clock_table,
  leakage_order,
  decay_check,
  norm_law,
  sigma_sweep,
  minibatch_clock,
};

const char* kind_name(ExperimentKind kind);

// Model family for sweeps, leakage and minibatch studies. For two_factor,
// dims = {d_in, r, d_out}; for deep_linear, dims = {d_0, ..., d_L}.
struct ModelConfig {
  ModelKind kind = ModelKind::two_factor;
  std::vector<std::size_t> dims = {4, 3, 4};
  double a0 = 1.0;  // scalar model only
  double b0 = 6.0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Planted regression data, or scalar targets when the model is scalar.
struct TaskConfig {
  std::size_t samples = 32;
  std::uint64_t data_seed = 2024;
  double noise = 0.1;
  Sampling sampling = Sampling::full_batch;
  std::size_t batch_size = 0;  // 0 = full batch
  std::vector<double> scalar_targets = {1.0};

  friend bool operator==(const TaskConfig&, const TaskConfig&) = default;
};

struct Figure7Config {
  std::vector<double> etas = {0.01, 0.04};
  std::int64_t gd_steps = 20;
  std::int64_t sgd_steps = 50000;
  std::int64_t adam_steps = 5000;
  std::int64_t minibatch_adam_steps = 200000;
  double a0 = 1.0;
  double b0 = 6.0;
  std::vector<double> targets = {0.0, 1.0, 2.0};
  double full_batch_target = 1.0;
  // The minibatch Adam panel draws one target uniformly per step; the cyclic
  // order used by panel (b) locks Adam's sign dynamics into a period-3 orbit.
  Sampling adam_sampling = Sampling::seeded_uniform;
  double threshold = 0.5;

  friend bool operator==(const Figure7Config&, const Figure7Config&) = default;
};

struct ClockCase {
  std::string label;
  double epochs = 0.0;
  std::int64_t batch = 1;
  double eta = 0.0;
  double lambda = 0.0;
  std::string clock = "t_sgd";  // t_sgd | t_l2 | t_adapt
  double quoted = 0.0;

  friend bool operator==(const ClockCase&, const ClockCase&) = default;
};

struct ClockTableConfig {
  std::int64_t n_train = 40000;
  double tolerance = 0.01;
  std::vector<ClockCase> cases = {
      {"sgd_b128_e300", 300.0, 128, 1e-3, 0.0, "t_sgd", 7.3e-4},
      {"sgd_b128_e5000", 5000.0, 128, 1e-3, 0.0, "t_sgd", 1.2e-2},
      {"sgd_b16_e300", 300.0, 16, 1e-2, 0.0, "t_sgd", 4.7},
      {"l2_b128_lambda1e-3", 300.0, 128, 1e-2, 1e-3, "t_l2", 0.94},
      {"l2_b128_lambda5e-3", 300.0, 128, 1e-2, 5e-3, "t_l2", 4.7},
  };

  friend bool operator==(const ClockTableConfig&, const ClockTableConfig&) = default;
};

struct LeakageConfig {
  double eta_min = 1e-5;
  double eta_max = 1e-3;
  std::size_t points = 8;
  std::vector<double> preconditioner = {2.0, 1.0};
  double sigma_w = 1.0;
  std::uint64_t state_seed = 7;

  friend bool operator==(const LeakageConfig&, const LeakageConfig&) = default;
};

struct MinibatchConfig {
  std::vector<std::size_t> batch_sizes = {1, 2, 4, 8, 16};
  std::size_t draws = 10000;
  double eta = 1e-2;
  std::size_t samples = 64;
  double sigma_w = 1.0;
  std::uint64_t state_seed = 3;

  friend bool operator==(const MinibatchConfig&, const MinibatchConfig&) = default;
};

struct NormLawConfig {
  std::size_t cases = 20;
  double eta = 1e-4;
  double max_abs_d0 = 50.0;
  double min_factor = 0.1;
  double max_factor = 7.0;
  double loss_tolerance = 1e-16;
  std::int64_t max_steps = 10000000;
  std::uint64_t seed = 11;
  double p_star = 1.0;
  bool include_reference_case = true;  // (a, b) = (1, 6), D0 = -35
  double tolerance = 1e-5;

  friend bool operator==(const NormLawConfig&, const NormLawConfig&) = default;
};

struct DecayConfig {
  double lambda = 0.5;
  double t_end = 1.0;
  double h = 1e-3;
  std::vector<double> conservation_h = {1e-2, 5e-3, 2.5e-3};
  std::uint64_t state_seed = 5;

  friend bool operator==(const DecayConfig&, const DecayConfig&) = default;
};

// One experiment per file. Every field has a default, so "{}" plus a kind is a
// complete config.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sigma_sweep;
  ModelConfig model;
  TaskConfig task;
  OptimizerSpec optimizer = default_sweep_optimizer();
  std::vector<double> sigma_grid = {0.5, 1.0, 2.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::int64_t steps = 2000;
  std::string output_dir;        // empty = chosen by the caller
  std::int64_t record_stride = 0;  // 0 = automatic
  std::size_t threads = 1;
  std::string metric = "final_norm";  // final_norm | final_loss | final_d

  Figure7Config figure7;
  ClockTableConfig clock_table;
  LeakageConfig leakage;
  MinibatchConfig minibatch;
  NormLawConfig norm_law;
  DecayConfig decay;

  static OptimizerSpec default_sweep_optimizer();

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig default_config(ExperimentKind kind);

// Optimizer spec with the schedule horizon filled in: a total_steps of 0 in
// the config means "the step budget".
OptimizerSpec effective_optimizer(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& config);

ModelShape model_shape(const ModelConfig& model);
QuadraticTask build_task(const ExperimentConfig& config, std::uint64_t sampler_seed);

}  // namespace memclock::harness

#endif  // MEMCLOCK_HARNESS_CONFIG_H_
