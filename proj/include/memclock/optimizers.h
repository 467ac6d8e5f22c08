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

#ifndef MEMCLOCK_OPTIMIZERS_H_
#define MEMCLOCK_OPTIMIZERS_H_

#include <cstdint>
#include <vector>

#include "memclock/matrix.h"
#include "memclock/models.h"
#include "memclock/schedule.h"

namespace memclock {

enum class Algorithm { gd, sgd, momentum_sgd, gd_weight_decay, precond_gd, adam };

// Hyperparameters for one optimizer. The minibatch size and sampling rule
// belong to the QuadraticTask.
//
// lambda is coupled decay for the Euclidean, preconditioned and momentum
// rules (W <- (1 - eta lambda) W - eta * direction, which is the same as an
// L2 penalty for plain SGD) and decoupled weight decay for Adam, i.e. AdamW.
struct OptimizerSpec {
  Algorithm algorithm = Algorithm::gd;
  Schedule schedule;
  double lambda = 0.0;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // One positive scalar per factor, in parameters() order. For the scalar
  // model this is {alpha, beta}.
  std::vector<double> preconditioner;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

void validate(const OptimizerSpec& spec);

// What one update saw and did. All factors move simultaneously:
//   W_j' = decay_factor * W_j - eta * directions[j].
struct StepRecord {
  std::int64_t step = 0;
  double eta = 0.0;
  // Batch loss at the pre-step state.
  double loss = 0.0;
  Batch batch;
  Matrix product_grad;
  // Chain-rule gradients of the batch loss, all induced from product_grad.
  std::vector<Matrix> layer_grads;
  std::vector<Matrix> directions;
  double decay_factor = 1.0;
};

struct StepResult {
  ModelState state;
  StepRecord record;
};

// Heavy-ball buffer; empty means zero.
using Velocity = std::vector<Matrix>;

struct AdamMoments {
  std::vector<Matrix> first;   // empty means zero
  std::vector<Matrix> second;  // empty means zero
  std::int64_t count = 0;      // updates taken so far
};

struct MomentumStepResult {
  ModelState state;
  Velocity velocity;
  StepRecord record;
};

struct AdamStepResult {
  ModelState state;
  AdamMoments moments;
  StepRecord record;
};

// None of the step functions touch their inputs. Each throws NumericError if
// the product gradient is non-finite and DivergenceError if a factor norm
// exceeds kBlowUpNorm; `k` is recorded in both.

// Plain simultaneous Euclidean step. Accepts gd (full batch only) and sgd,
// with lambda == 0.
StepResult step_gd(const ModelState& state, const QuadraticTask& task,
                   const OptimizerSpec& spec, std::int64_t k);

// W' = (1 - eta_k lambda) W - eta_k H. Throws DomainError if eta_k lambda >= 1.
StepResult step_weight_decay(const ModelState& state, const QuadraticTask& task,
                             const OptimizerSpec& spec, std::int64_t k);

// Heavy ball: v' = mu v + (H + lambda W), W' = W - eta_k v'.
MomentumStepResult step_momentum(const ModelState& state, const Velocity& velocity,
                                 const QuadraticTask& task, const OptimizerSpec& spec,
                                 std::int64_t k);

// Q_j = s_j H_j with one positive scalar s_j per factor.
StepResult step_precond(const ModelState& state, const QuadraticTask& task,
                        const OptimizerSpec& spec, std::int64_t k);

// Bias-corrected Adam, per entry:
//   m' = b1 m + (1 - b1) h,  v' = b2 v + (1 - b2) h^2,
//   W' = (1 - eta lambda) W - eta (m' / (1 - b1^t)) / (sqrt(v' / (1 - b2^t)) + eps)
// with t = moments.count + 1.
AdamStepResult step_adam(const ModelState& state, const AdamMoments& moments,
                         const QuadraticTask& task, const OptimizerSpec& spec,
                         std::int64_t k);

// Owns the per-trajectory optimizer state (velocity, Adam moments) and
// dispatches on spec.algorithm. gd/sgd with lambda > 0 take the coupled-decay
// step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerSpec spec);

  StepResult step(const ModelState& state, const QuadraticTask& task, std::int64_t k);

  const OptimizerSpec& spec() const { return spec_; }

 private:
  OptimizerSpec spec_;
  Velocity velocity_;
  AdamMoments moments_;
};

}  // namespace memclock

#endif  // MEMCLOCK_OPTIMIZERS_H_
