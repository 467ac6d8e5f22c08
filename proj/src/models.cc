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

#include "memclock/models.h"

#include <cmath>
#include <string>
#include <utility>

#include "memclock/error.h"
#include "memclock/rng.h"

namespace memclock {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_batch(const Batch& batch, std::size_t n) {
  if (batch.empty()) throw ShapeError("loss_and_product_grad: empty batch");
  for (std::size_t i : batch) {
    if (i >= n) {
      throw ShapeError("loss_and_product_grad: sample index " + std::to_string(i) +
                       " out of range for " + std::to_string(n) + " samples");
    }
  }
}

LossGrad scalar_loss_grad(double p, const std::vector<double>& targets,
                          const Batch& batch) {
  check_batch(batch, targets.size());
  double loss = 0.0;
  double g = 0.0;
  for (std::size_t i : batch) {
    const double r = p - targets[i];
    loss += r * r;
    g += 2.0 * r;
  }
  const double b = static_cast<double>(batch.size());
  return {loss / b, Matrix::scalar(g / b)};
}

LossGrad matrix_loss_grad(const Matrix& w, const QuadraticTask& task,
                          const Batch& batch) {
  const Matrix& x = task.inputs();
  const Matrix& y = task.targets();
  if (w.rows() != y.rows() || w.cols() != x.rows()) {
    throw ShapeError("loss_and_product_grad: product " + w.shape_string() +
                     " does not map inputs " + x.shape_string() + " to targets " +
                     y.shape_string());
  }
  check_batch(batch, x.cols());
  const std::size_t b = batch.size();
  Matrix xb(x.rows(), b);
  Matrix yb(y.rows(), b);
  for (std::size_t c = 0; c < b; ++c) {
    for (std::size_t r = 0; r < x.rows(); ++r) xb(r, c) = x(r, batch[c]);
    for (std::size_t r = 0; r < y.rows(); ++r) yb(r, c) = y(r, batch[c]);
  }
  const Matrix residual = w * xb - yb;
  const double inv_b = 1.0 / static_cast<double>(b);
  return {squared_frobenius_norm(residual) * inv_b,
          (2.0 * inv_b) * (residual * transpose(xb))};
}

Matrix scalar_matrix(double x) { return Matrix::scalar(x); }

}  // namespace

void validate(const ModelState& state) {
  std::visit(Overloaded{
                 [](const ScalarState&) {},
                 [](const TwoFactorState& s) {
                   if (s.u.empty() || s.v.empty() || s.u.cols() != s.v.rows()) {
                     throw ShapeError("TwoFactorState: U " + s.u.shape_string() +
                                      " and V " + s.v.shape_string() +
                                      " are not conformable");
                   }
                 },
                 [](const DeepLinearState& s) {
                   if (s.layers.size() < 2) {
                     throw ShapeError("DeepLinearState: need at least two layers");
                   }
                   for (std::size_t j = 0; j < s.layers.size(); ++j) {
                     if (s.layers[j].empty()) {
                       throw ShapeError("DeepLinearState: empty layer " +
                                        std::to_string(j + 1));
                     }
                     if (j > 0 && s.layers[j].cols() != s.layers[j - 1].rows()) {
                       throw ShapeError("DeepLinearState: W_" + std::to_string(j + 1) +
                                        " " + s.layers[j].shape_string() +
                                        " does not follow W_" + std::to_string(j) +
                                        " " + s.layers[j - 1].shape_string());
                     }
                   }
                 },
             },
             state);
}

double product(const ScalarState& state) { return state.a * state.b; }

Matrix product(const TwoFactorState& state) { return state.u * state.v; }

Matrix product(const DeepLinearState& state) {
  Matrix out = state.layers.front();
  for (std::size_t j = 1; j < state.layers.size(); ++j) out = state.layers[j] * out;
  return out;
}

Matrix product(const ModelState& state) {
  return std::visit(Overloaded{
                        [](const ScalarState& s) { return scalar_matrix(product(s)); },
                        [](const auto& s) { return product(s); },
                    },
                    state);
}

std::vector<Matrix> parameters(const ModelState& state) {
  return std::visit(
      Overloaded{
          [](const ScalarState& s) {
            return std::vector<Matrix>{scalar_matrix(s.a), scalar_matrix(s.b)};
          },
          [](const TwoFactorState& s) { return std::vector<Matrix>{s.u, s.v}; },
          [](const DeepLinearState& s) { return s.layers; },
      },
      state);
}

ModelState with_parameters(const ModelState& like, std::vector<Matrix> params) {
  return std::visit(
      Overloaded{
          [&](const ScalarState&) -> ModelState {
            if (params.size() != 2 || params[0].size() != 1 || params[1].size() != 1) {
              throw ShapeError("with_parameters: scalar model takes two 1x1 factors");
            }
            return ScalarState{params[0](0, 0), params[1](0, 0)};
          },
          [&](const TwoFactorState&) -> ModelState {
            if (params.size() != 2) {
              throw ShapeError("with_parameters: two-factor model takes two factors");
            }
            TwoFactorState s{std::move(params[0]), std::move(params[1])};
            validate(s);
            return s;
          },
          [&](const DeepLinearState&) -> ModelState {
            DeepLinearState s{std::move(params)};
            validate(s);
            return s;
          },
      },
      like);
}

double total_norm(const ModelState& state) {
  double sum = 0.0;
  for (const Matrix& w : parameters(state)) sum += squared_frobenius_norm(w);
  return std::sqrt(sum);
}

QuadraticTask QuadraticTask::scalar(std::vector<double> targets, Sampling sampling,
                                    std::size_t batch_size, std::uint64_t sampler_seed) {
  if (targets.empty()) throw ShapeError("QuadraticTask: no targets");
  QuadraticTask task;
  task.is_scalar_ = true;
  task.scalar_targets_ = std::move(targets);
  task.finish_batch_setup(sampling, batch_size, sampler_seed);
  return task;
}

QuadraticTask QuadraticTask::regression(Matrix inputs, Matrix targets, Sampling sampling,
                                        std::size_t batch_size,
                                        std::uint64_t sampler_seed) {
  if (inputs.cols() != targets.cols() || inputs.cols() == 0) {
    throw ShapeError("QuadraticTask: inputs " + inputs.shape_string() + " and targets " +
                     targets.shape_string() + " disagree on sample count");
  }
  QuadraticTask task;
  task.is_scalar_ = false;
  task.inputs_ = std::move(inputs);
  task.targets_ = std::move(targets);
  task.finish_batch_setup(sampling, batch_size, sampler_seed);
  return task;
}

void QuadraticTask::finish_batch_setup(Sampling sampling, std::size_t batch_size,
                                       std::uint64_t sampler_seed) {
  const std::size_t n = sample_count();
  if (sampling == Sampling::full_batch || batch_size == 0) batch_size = n;
  if (batch_size > n) {
    throw DomainError("QuadraticTask: batch size " + std::to_string(batch_size) +
                      " exceeds " + std::to_string(n) + " samples");
  }
  sampling_ = sampling;
  batch_size_ = batch_size;
  sampler_seed_ = sampler_seed;
}

std::size_t QuadraticTask::sample_count() const {
  return is_scalar_ ? scalar_targets_.size() : inputs_.cols();
}

Batch QuadraticTask::full_batch() const {
  Batch batch(sample_count());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  return batch;
}

Batch QuadraticTask::select_batch(std::int64_t k) const {
  const std::size_t n = sample_count();
  switch (sampling_) {
    case Sampling::full_batch:
      return full_batch();
    case Sampling::cyclic: {
      Batch batch(batch_size_);
      const auto start = static_cast<std::uint64_t>(k) * batch_size_;
      for (std::size_t i = 0; i < batch_size_; ++i) batch[i] = (start + i) % n;
      return batch;
    }
    case Sampling::seeded_uniform: {
      Rng rng(Rng::derive(sampler_seed_, static_cast<std::uint64_t>(k)));
      Batch batch(batch_size_);
      for (std::size_t& i : batch) i = rng.below(n);
      return batch;
    }
  }
  throw DomainError("QuadraticTask: unknown sampling rule");
}

QuadraticTask QuadraticTask::resampled(Sampling sampling, std::size_t batch_size,
                                       std::uint64_t sampler_seed) const {
  QuadraticTask copy = *this;
  copy.finish_batch_setup(sampling, batch_size, sampler_seed);
  return copy;
}

QuadraticTask planted_regression_task(std::size_t d_in, std::size_t d_out,
                                      std::size_t samples, std::uint64_t data_seed,
                                      double noise, Sampling sampling,
                                      std::size_t batch_size, std::uint64_t sampler_seed) {
  Rng rng(data_seed);
  Matrix teacher(d_out, d_in);
  const double teacher_scale = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& w : teacher.entries()) w = teacher_scale * rng.normal();
  Matrix x(d_in, samples);
  for (double& v : x.entries()) v = rng.normal();
  Matrix y = teacher * x;
  for (double& v : y.entries()) v += noise * rng.normal();
  return QuadraticTask::regression(std::move(x), std::move(y), sampling, batch_size,
                                   sampler_seed);
}

LossGrad loss_and_product_grad(const ModelState& state, const QuadraticTask& task,
                               const Batch& batch) {
  if (const auto* s = std::get_if<ScalarState>(&state)) {
    if (!task.is_scalar()) {
      throw ShapeError("loss_and_product_grad: scalar model needs a scalar task");
    }
    return scalar_loss_grad(product(*s), task.scalar_targets(), batch);
  }
  if (task.is_scalar()) {
    throw ShapeError("loss_and_product_grad: matrix model needs a regression task");
  }
  return matrix_loss_grad(product(state), task, batch);
}

double full_loss(const ModelState& state, const QuadraticTask& task) {
  return loss_and_product_grad(state, task, task.full_batch()).loss;
}

std::vector<Matrix> layer_grads(const DeepLinearState& state, const Matrix& g) {
  const auto& w = state.layers;
  const std::size_t depth = w.size();
  if (g.rows() != w.back().rows() || g.cols() != w.front().cols()) {
    throw ShapeError("layer_grads: G is " + g.shape_string() + " but the product is " +
                     std::to_string(w.back().rows()) + "x" +
                     std::to_string(w.front().cols()));
  }
  // before[j] = W_{j-1} ... W_1 (B_j), after[j] = W_L ... W_{j+1} (A_j).
  std::vector<Matrix> before(depth);
  std::vector<Matrix> after(depth);
  before[0] = Matrix::identity(w.front().cols());
  for (std::size_t j = 1; j < depth; ++j) before[j] = w[j - 1] * before[j - 1];
  after[depth - 1] = Matrix::identity(w.back().rows());
  for (std::size_t j = depth - 1; j-- > 0;) after[j] = after[j + 1] * w[j + 1];

  std::vector<Matrix> grads;
  grads.reserve(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    grads.push_back(transpose(after[j]) * g * transpose(before[j]));
  }
  return grads;
}

std::vector<Matrix> layer_grads(const ModelState& state, const Matrix& g) {
  return std::visit(
      Overloaded{
          [&](const ScalarState& s) {
            if (g.size() != 1) throw ShapeError("layer_grads: scalar model needs 1x1 G");
            const double gv = g(0, 0);
            return std::vector<Matrix>{scalar_matrix(gv * s.b), scalar_matrix(gv * s.a)};
          },
          [&](const TwoFactorState& s) {
            if (g.rows() != s.u.rows() || g.cols() != s.v.cols()) {
              throw ShapeError("layer_grads: G is " + g.shape_string() +
                               " but UV is " + std::to_string(s.u.rows()) + "x" +
                               std::to_string(s.v.cols()));
            }
            return std::vector<Matrix>{g * transpose(s.v), transpose(s.u) * g};
          },
          [&](const DeepLinearState& s) { return layer_grads(s, g); },
      },
      state);
}

ModelState init_state(const InitSpec& spec, const ModelShape& shape) {
  if (!(spec.sigma_w > 0.0) || !std::isfinite(spec.sigma_w)) {
    throw DomainError("init_state: sigma_w must be positive, got " +
                      std::to_string(spec.sigma_w));
  }

  std::vector<std::pair<std::size_t, std::size_t>> factor_shapes;
  ModelState like;
  switch (shape.kind) {
    case ModelKind::scalar:
      factor_shapes = {{1, 1}, {1, 1}};
      like = ScalarState{};
      break;
    case ModelKind::two_factor:
      if (shape.dims.size() != 3) {
        throw ShapeError("init_state: two-factor shape needs dims {d_in, r, d_out}");
      }
      factor_shapes = {{shape.dims[2], shape.dims[1]}, {shape.dims[1], shape.dims[0]}};
      like = TwoFactorState{};
      break;
    case ModelKind::deep_linear:
      if (shape.dims.size() < 3) {
        throw ShapeError("init_state: deep-linear shape needs at least 3 dims");
      }
      for (std::size_t j = 1; j < shape.dims.size(); ++j) {
        factor_shapes.emplace_back(shape.dims[j], shape.dims[j - 1]);
      }
      like = DeepLinearState{};
      break;
  }
  for (const auto& [rows, cols] : factor_shapes) {
    if (rows == 0 || cols == 0) throw ShapeError("init_state: zero dimension");
  }

  std::vector<Matrix> params;
  if (spec.scheme == InitScheme::fan_in_normal) {
    Rng rng(spec.seed);
    for (const auto& [rows, cols] : factor_shapes) {
      Matrix w(rows, cols);
      const double scale = spec.sigma_w / std::sqrt(static_cast<double>(cols));
      for (double& x : w.entries()) x = scale * rng.normal();
      params.push_back(std::move(w));
    }
  } else {
    std::size_t needed = 0;
    for (const auto& [rows, cols] : factor_shapes) needed += rows * cols;
    if (spec.values.size() != needed) {
      throw ShapeError("init_state: expected " + std::to_string(needed) +
                       " explicit values, got " + std::to_string(spec.values.size()));
    }
    std::size_t offset = 0;
    for (const auto& [rows, cols] : factor_shapes) {
      std::vector<double> entries(spec.values.begin() + static_cast<std::ptrdiff_t>(offset),
                                  spec.values.begin() +
                                      static_cast<std::ptrdiff_t>(offset + rows * cols));
      for (double& x : entries) x *= spec.sigma_w;
      offset += rows * cols;
      params.emplace_back(rows, cols, std::move(entries));
    }
  }
  return with_parameters(like, std::move(params));
}

}  // namespace memclock
