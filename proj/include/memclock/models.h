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

#ifndef MEMCLOCK_MODELS_H_
#define MEMCLOCK_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "memclock/matrix.h"

namespace memclock {

// Predictor p = a * b.
struct ScalarState {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const ScalarState&, const ScalarState&) = default;
};

// Predictor W = U V with U: d_out x r and V: r x d_in.
struct TwoFactorState {
  Matrix u;
  Matrix v;
  friend bool operator==(const TwoFactorState&, const TwoFactorState&) = default;
};

// Predictor F = W_L ... W_1. layers[0] is W_1 (d_1 x d_0), applied first.
struct DeepLinearState {
  std::vector<Matrix> layers;
  friend bool operator==(const DeepLinearState&, const DeepLinearState&) = default;
};

using ModelState = std::variant<ScalarState, TwoFactorState, DeepLinearState>;

// Throws ShapeError unless the factors chain (and L >= 2 for deep nets).
void validate(const ModelState& state);

double product(const ScalarState& state);
Matrix product(const TwoFactorState& state);
Matrix product(const DeepLinearState& state);
// 1x1 for the scalar model.
Matrix product(const ModelState& state);

// Flat view of the trainable factors: [a, b] as 1x1 matrices, [U, V], or
// [W_1, ..., W_L]. Optimizers work on this view.
std::vector<Matrix> parameters(const ModelState& state);
// Inverse of parameters(); `like` supplies the variant alternative.
ModelState with_parameters(const ModelState& like, std::vector<Matrix> params);

// sqrt(sum_j ||W_j||_F^2).
double total_norm(const ModelState& state);

enum class Sampling { full_batch, cyclic, seeded_uniform };

using Batch = std::vector<std::size_t>;

// Quadratic regression data plus the minibatch rule.
//
// Scalar tasks hold targets y_i with implicit input x = 1, and the loss on a
// batch B is mean_{i in B} (ab - y_i)^2. Matrix tasks hold inputs X
// (d_in x n) and targets Y (d_out x n) with loss (1/|B|) ||W X_B - Y_B||_F^2.
//
// Batch selection is a pure function of the step index:
//   full_batch      every sample;
//   cyclic          samples (k*b + i) mod n, i < b, in declared order;
//   seeded_uniform  b i.i.d. draws with replacement from a substream of the
//                   sampler seed keyed by k.
class QuadraticTask {
 public:
  // batch_size == 0 means the whole data set.
  static QuadraticTask scalar(std::vector<double> targets,
                              Sampling sampling = Sampling::full_batch,
                              std::size_t batch_size = 0,
                              std::uint64_t sampler_seed = 0);
  static QuadraticTask regression(Matrix inputs, Matrix targets,
                                  Sampling sampling = Sampling::full_batch,
                                  std::size_t batch_size = 0,
                                  std::uint64_t sampler_seed = 0);

  bool is_scalar() const { return is_scalar_; }
  std::size_t sample_count() const;
  // Effective b; equals sample_count() for full-batch tasks.
  std::size_t batch_size() const { return batch_size_; }
  Sampling sampling() const { return sampling_; }
  std::uint64_t sampler_seed() const { return sampler_seed_; }

  const std::vector<double>& scalar_targets() const { return scalar_targets_; }
  const Matrix& inputs() const { return inputs_; }
  const Matrix& targets() const { return targets_; }

  Batch select_batch(std::int64_t k) const;
  Batch full_batch() const;

  // Same data, different sampling rule.
  QuadraticTask resampled(Sampling sampling, std::size_t batch_size,
                          std::uint64_t sampler_seed) const;

 private:
  QuadraticTask() = default;
  void finish_batch_setup(Sampling sampling, std::size_t batch_size,
                          std::uint64_t sampler_seed);

  bool is_scalar_ = true;
  std::vector<double> scalar_targets_;
  Matrix inputs_;
  Matrix targets_;
  Sampling sampling_ = Sampling::full_batch;
  std::size_t batch_size_ = 0;
  std::uint64_t sampler_seed_ = 0;
};

// Teacher-student data: X ~ N(0,1), Y = W* X + noise * N(0,1) with
// W* entries ~ N(0, 1/d_in), all drawn from `data_seed`.
QuadraticTask planted_regression_task(std::size_t d_in, std::size_t d_out,
                                      std::size_t samples, std::uint64_t data_seed,
                                      double noise,
                                      Sampling sampling = Sampling::full_batch,
                                      std::size_t batch_size = 0,
                                      std::uint64_t sampler_seed = 0);

struct LossGrad {
  double loss = 0.0;
  // Gradient of the batch loss with respect to the product (1x1 for scalar).
  Matrix product_grad;
};

// Throws ShapeError for an empty batch, an out-of-range index, or a task that
// does not match the model's product shape.
LossGrad loss_and_product_grad(const ModelState& state, const QuadraticTask& task,
                               const Batch& batch);

// Full-batch loss.
double full_loss(const ModelState& state, const QuadraticTask& task);

// Chain-rule layer gradients H_j = A_j^T G B_j^T with A_j = W_L...W_{j+1},
// B_j = W_{j-1}...W_1, all induced from the same G. Ordered like
// parameters(); for two factors this is (G V^T, U^T G), for the scalar model
// (g b, g a).
std::vector<Matrix> layer_grads(const DeepLinearState& state, const Matrix& g);
std::vector<Matrix> layer_grads(const ModelState& state, const Matrix& g);

enum class ModelKind { scalar, two_factor, deep_linear };

// dims lists d_0 (input) ... d_L (output). Two-factor models use
// {d_in, r, d_out}; the scalar model ignores dims.
struct ModelShape {
  ModelKind kind = ModelKind::two_factor;
  std::vector<std::size_t> dims;
};

enum class InitScheme { fan_in_normal, explicit_values };

struct InitSpec {
  double sigma_w = 1.0;
  std::uint64_t seed = 0;
  InitScheme scheme = InitScheme::fan_in_normal;
  // explicit_values only: entries in parameters() order, row-major, scaled
  // by sigma_w. The scalar model takes {a, b}.
  std::vector<double> values;
};

// fan_in_normal draws every entry of a d_j x d_{j-1} factor from
// N(0, sigma_w^2 / d_{j-1}); the scalar model uses fan-in 1. Draws are taken in
// parameters() order from Rng(seed). Throws DomainError for sigma_w <= 0.
ModelState init_state(const InitSpec& spec, const ModelShape& shape);

}  // namespace memclock

#endif  // MEMCLOCK_MODELS_H_
