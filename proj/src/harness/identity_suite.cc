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

#include "memclock/harness/identity_suite.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <utility>

#include "memclock/conservation.h"
#include "memclock/error.h"
#include "memclock/harness/output.h"
#include "memclock/rng.h"

namespace memclock::harness {
namespace {

struct Subject {
  ModelState state;
  QuadraticTask task;
};

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.below(hi - lo + 1);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

Subject random_subject(Rng& rng, bool deep) {
  ModelShape shape;
  if (deep) {
    const std::size_t depth = draw_between(rng, 2, 4);
    shape.kind = ModelKind::deep_linear;
    for (std::size_t j = 0; j <= depth; ++j) shape.dims.push_back(draw_between(rng, 1, 5));
  } else {
    shape.kind = ModelKind::two_factor;
    shape.dims = {draw_between(rng, 1, 8), draw_between(rng, 1, 4), draw_between(rng, 1, 8)};
  }
  const std::size_t n = 16;
  const std::size_t b = draw_between(rng, 1, n);
  QuadraticTask task = planted_regression_task(shape.dims.front(), shape.dims.back(), n,
                                               rng.next_u64(), 0.1, Sampling::seeded_uniform,
                                               b, rng.next_u64());
  const double sigma = 0.5 + rng.uniform();
  ModelState state = init_state({sigma, rng.next_u64(), InitScheme::fan_in_normal, {}}, shape);
  return {std::move(state), std::move(task)};
}

std::size_t factor_count(const ModelState& s) { return parameters(s).size(); }

// Residual of one step, given the optimizer's own record.
using Residual = std::function<std::vector<double>(const ModelState& before,
                                                   const ModelState& after,
                                                   const StepRecord& record,
                                                   const OptimizerSpec& spec)>;

struct Family {
  std::string name;
  bool deep_mix;  // alternate two-factor and deep subjects
  std::function<OptimizerSpec(Rng&, const ModelState&, std::int64_t)> make_spec;
  Residual residual;
};

std::vector<double> euclidean_residual(const ModelState& before, const ModelState& after,
                                       const StepRecord& rec, const OptimizerSpec& spec) {
  return leakage_residual(before, after, rec.product_grad, rec.eta, spec.lambda);
}

std::vector<double> direction_residual(const ModelState& before, const ModelState& after,
                                       const StepRecord& rec, const OptimizerSpec& spec) {
  // Heavy-ball folds decay into its velocity and leaves the factors unscaled.
  const double lambda = spec.algorithm == Algorithm::momentum_sgd ? 0.0 : spec.lambda;
  return preconditioned_residual(before, after, rec.directions, rec.eta, lambda);
}

OptimizerSpec base_spec(Algorithm algorithm, double eta, std::int64_t steps) {
  OptimizerSpec spec;
  spec.algorithm = algorithm;
  spec.schedule = constant_schedule(eta, steps);
  return spec;
}

}  // namespace

IdentitySuiteResult run_identity_suite(const IdentitySuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Family> families = {
      {"euclidean_two_factor", false,
       [](Rng& rng, const ModelState&, std::int64_t k) {
         return base_spec(Algorithm::sgd, log_uniform(rng, 1e-3, 3e-2), k);
       },
       euclidean_residual},
      {"euclidean_deep", true,
       [](Rng& rng, const ModelState&, std::int64_t k) {
         return base_spec(Algorithm::sgd, log_uniform(rng, 1e-3, 3e-2), k);
       },
       euclidean_residual},
      {"weight_decay", false,
       [](Rng& rng, const ModelState&, std::int64_t k) {
         OptimizerSpec s = base_spec(Algorithm::gd_weight_decay, log_uniform(rng, 1e-3, 3e-2), k);
         s.lambda = log_uniform(rng, 1e-2, 1.0);
         return s;
       },
       euclidean_residual},
      {"preconditioned", false,
       [](Rng& rng, const ModelState& state, std::int64_t k) {
         OptimizerSpec s = base_spec(Algorithm::precond_gd, log_uniform(rng, 1e-3, 2e-2), k);
         for (std::size_t j = 0; j < factor_count(state); ++j) {
           s.preconditioner.push_back(0.5 + 2.5 * rng.uniform());
         }
         if (rng.uniform() < 0.5) s.lambda = log_uniform(rng, 1e-2, 1.0);
         return s;
       },
       direction_residual},
      {"momentum_directions", false,
       [](Rng& rng, const ModelState&, std::int64_t k) {
         OptimizerSpec s = base_spec(Algorithm::momentum_sgd, log_uniform(rng, 1e-3, 1e-2), k);
         s.momentum = 0.5 + 0.4 * rng.uniform();
         return s;
       },
       direction_residual},
      {"adam_directions", false,
       [](Rng& rng, const ModelState&, std::int64_t k) {
         OptimizerSpec s = base_spec(Algorithm::adam, log_uniform(rng, 1e-4, 1e-2), k);
         if (rng.uniform() < 0.5) s.lambda = log_uniform(rng, 1e-2, 1.0);
         return s;
       },
       direction_residual},
  };

  IdentitySuiteResult out;
  Rng rng(options.seed);
  for (std::size_t f = 0; f < families.size(); ++f) {
    const Family& family = families[f];
    IdentityFamily result;
    result.name = family.name;
    for (std::size_t t = 0; t < options.trajectories_per_family; ++t) {
      // Deep subjects interleave with two-factor ones so both kinds appear.
      const bool deep = family.deep_mix || (t % 2 == 1);
      Subject subject = random_subject(rng, deep);
      const OptimizerSpec spec =
          family.make_spec(rng, subject.state, options.steps_per_trajectory);
      Optimizer optimizer(spec);
      ModelState state = subject.state;
      for (std::int64_t k = 0; k < options.steps_per_trajectory; ++k) {
        StepResult step;
        try {
          step = optimizer.step(state, subject.task, k);
        } catch (const DivergenceError&) {
          break;
        }
        const double scale = 1.0 + imbalance(state).total_frobenius();
        for (double r : family.residual(state, step.state, step.record, spec)) {
          result.max_normalized_residual = std::max(result.max_normalized_residual, r / scale);
        }
        ++result.steps;
        state = std::move(step.state);
      }
    }
    out.total_steps += result.steps;
    out.max_normalized_residual =
        std::max(out.max_normalized_residual, result.max_normalized_residual);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%zu steps, max residual %.3g <= %g", result.steps,
                  result.max_normalized_residual, options.tolerance);
    out.checks.push_back({"identity_" + family.name,
                          result.max_normalized_residual <= options.tolerance, detail});
    out.families.push_back(std::move(result));
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.checks.push_back({"identity_step_count", out.total_steps >= 1000,
                        std::to_string(out.total_steps) + " recorded steps >= 1000"});

  nlohmann::json families_json = nlohmann::json::array();
  for (const IdentityFamily& f : out.families) {
    families_json.push_back({{"name", f.name},
                             {"steps", f.steps},
                             {"max_normalized_residual", f.max_normalized_residual}});
  }
  out.summary = {{"kind", "identity_suite"},
                 {"git_describe", git_describe()},
                 {"families", families_json},
                 {"total_steps", out.total_steps},
                 {"max_normalized_residual", out.max_normalized_residual},
                 {"checks", checks_json(out.checks)},
                 {"wall_time_s", out.seconds}};
  return out;
}

}  // namespace memclock::harness
