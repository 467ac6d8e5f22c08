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

#include "memclock/optimizers.h"

#include <cmath>
#include <string>
#include <utility>

#include "memclock/error.h"

namespace memclock {
namespace {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::gd: return "gd";
    case Algorithm::sgd: return "sgd";
    case Algorithm::momentum_sgd: return "momentum_sgd";
    case Algorithm::gd_weight_decay: return "gd_weight_decay";
    case Algorithm::precond_gd: return "precond_gd";
    case Algorithm::adam: return "adam";
  }
  return "?";
}

void require_algorithm(const OptimizerSpec& spec, std::initializer_list<Algorithm> allowed,
                       const char* fn) {
  for (Algorithm a : allowed) {
    if (spec.algorithm == a) return;
  }
  throw DomainError(std::string(fn) + ": algorithm " + algorithm_name(spec.algorithm) +
                    " is not handled here");
}

struct Evaluation {
  StepRecord record;
  std::vector<Matrix> params;
};

Evaluation evaluate(const ModelState& state, const QuadraticTask& task,
                    const OptimizerSpec& spec, std::int64_t k) {
  Evaluation out;
  StepRecord& rec = out.record;
  rec.step = k;
  rec.eta = schedule_eta(spec.schedule, k);
  rec.batch = task.select_batch(k);
  LossGrad lg = loss_and_product_grad(state, task, rec.batch);
  if (!lg.product_grad.is_finite() || !std::isfinite(lg.loss)) {
    throw NumericError("non-finite product gradient", k);
  }
  rec.loss = lg.loss;
  rec.layer_grads = layer_grads(state, lg.product_grad);
  rec.product_grad = std::move(lg.product_grad);
  out.params = parameters(state);
  return out;
}

double checked_decay_factor(double eta, double lambda, const char* fn) {
  if (!(lambda >= 0.0)) throw DomainError(std::string(fn) + ": lambda must be >= 0");
  if (eta * lambda >= 1.0) {
    throw DomainError(std::string(fn) + ": eta * lambda = " + std::to_string(eta * lambda) +
                      " >= 1, decay would not contract");
  }
  return 1.0 - eta * lambda;
}

// W_j' = c W_j - eta D_j for every factor at once.
ModelState apply_update(const ModelState& like, std::vector<Matrix> params,
                        const std::vector<Matrix>& directions, double c, double eta,
                        std::int64_t k) {
  for (std::size_t j = 0; j < params.size(); ++j) {
    auto w = params[j].entries();
    const auto d = directions[j].entries();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = c * w[i] - eta * d[i];
    const double norm = frobenius_norm(params[j]);
    if (!std::isfinite(norm) || norm > kBlowUpNorm) {
      throw DivergenceError("factor " + std::to_string(j + 1) + " norm " +
                                std::to_string(norm) + " exceeds blow-up threshold",
                            static_cast<double>(k));
    }
  }
  return with_parameters(like, std::move(params));
}

}  // namespace

void validate(const OptimizerSpec& spec) {
  validate(spec.schedule);
  if (!(spec.lambda >= 0.0)) throw DomainError("OptimizerSpec: lambda must be >= 0");
  if (!(spec.momentum >= 0.0 && spec.momentum < 1.0)) {
    throw DomainError("OptimizerSpec: momentum must lie in [0, 1)");
  }
  if (!(spec.beta1 >= 0.0 && spec.beta1 < 1.0) || !(spec.beta2 >= 0.0 && spec.beta2 < 1.0)) {
    throw DomainError("OptimizerSpec: Adam betas must lie in [0, 1)");
  }
  if (!(spec.epsilon > 0.0)) throw DomainError("OptimizerSpec: epsilon must be positive");
  for (double s : spec.preconditioner) {
    if (!(s > 0.0)) throw DomainError("OptimizerSpec: preconditioner scalars must be positive");
  }
}

StepResult step_gd(const ModelState& state, const QuadraticTask& task,
                   const OptimizerSpec& spec, std::int64_t k) {
  require_algorithm(spec, {Algorithm::gd, Algorithm::sgd}, "step_gd");
  if (spec.algorithm == Algorithm::gd && task.sampling() != Sampling::full_batch) {
    throw DomainError("step_gd: gd needs a full-batch task; use sgd for minibatches");
  }
  if (spec.lambda != 0.0) {
    throw DomainError("step_gd: lambda > 0 needs step_weight_decay");
  }
  Evaluation ev = evaluate(state, task, spec, k);
  ev.record.directions = ev.record.layer_grads;
  ModelState next = apply_update(state, std::move(ev.params), ev.record.directions, 1.0,
                                 ev.record.eta, k);
  return {std::move(next), std::move(ev.record)};
}

StepResult step_weight_decay(const ModelState& state, const QuadraticTask& task,
                             const OptimizerSpec& spec, std::int64_t k) {
  require_algorithm(spec, {Algorithm::gd, Algorithm::sgd, Algorithm::gd_weight_decay},
                    "step_weight_decay");
  Evaluation ev = evaluate(state, task, spec, k);
  const double c = checked_decay_factor(ev.record.eta, spec.lambda, "step_weight_decay");
  ev.record.decay_factor = c;
  ev.record.directions = ev.record.layer_grads;
  ModelState next =
      apply_update(state, std::move(ev.params), ev.record.directions, c, ev.record.eta, k);
  return {std::move(next), std::move(ev.record)};
}

MomentumStepResult step_momentum(const ModelState& state, const Velocity& velocity,
                                 const QuadraticTask& task, const OptimizerSpec& spec,
                                 std::int64_t k) {
  require_algorithm(spec, {Algorithm::momentum_sgd}, "step_momentum");
  if (!(spec.momentum >= 0.0 && spec.momentum < 1.0)) {
    throw DomainError("step_momentum: momentum must lie in [0, 1)");
  }
  Evaluation ev = evaluate(state, task, spec, k);
  checked_decay_factor(ev.record.eta, spec.lambda, "step_momentum");
  const std::size_t depth = ev.params.size();
  if (!velocity.empty() && velocity.size() != depth) {
    throw ShapeError("step_momentum: velocity has " + std::to_string(velocity.size()) +
                     " factors, state has " + std::to_string(depth));
  }

  Velocity next_velocity;
  next_velocity.reserve(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    Matrix grad = ev.record.layer_grads[j];
    if (spec.lambda != 0.0) grad += spec.lambda * ev.params[j];
    if (!velocity.empty()) {
      if (!velocity[j].same_shape(grad)) {
        throw ShapeError("step_momentum: velocity " + velocity[j].shape_string() +
                         " vs factor " + grad.shape_string());
      }
      auto g = grad.entries();
      const auto v = velocity[j].entries();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = spec.momentum * v[i] + g[i];
    }
    next_velocity.push_back(std::move(grad));
  }
  ev.record.directions = next_velocity;
  ModelState next = apply_update(state, std::move(ev.params), ev.record.directions, 1.0,
                                 ev.record.eta, k);
  return {std::move(next), std::move(next_velocity), std::move(ev.record)};
}

StepResult step_precond(const ModelState& state, const QuadraticTask& task,
                        const OptimizerSpec& spec, std::int64_t k) {
  require_algorithm(spec, {Algorithm::precond_gd}, "step_precond");
  Evaluation ev = evaluate(state, task, spec, k);
  const std::size_t depth = ev.params.size();
  if (spec.preconditioner.size() != depth) {
    throw DomainError("step_precond: need " + std::to_string(depth) +
                      " preconditioner scalars, got " +
                      std::to_string(spec.preconditioner.size()));
  }
  for (double s : spec.preconditioner) {
    if (!(s > 0.0)) throw DomainError("step_precond: preconditioner scalars must be positive");
  }
  const double c = checked_decay_factor(ev.record.eta, spec.lambda, "step_precond");
  ev.record.decay_factor = c;
  for (std::size_t j = 0; j < depth; ++j) {
    ev.record.directions.push_back(spec.preconditioner[j] * ev.record.layer_grads[j]);
  }
  ModelState next =
      apply_update(state, std::move(ev.params), ev.record.directions, c, ev.record.eta, k);
  return {std::move(next), std::move(ev.record)};
}

AdamStepResult step_adam(const ModelState& state, const AdamMoments& moments,
                         const QuadraticTask& task, const OptimizerSpec& spec,
                         std::int64_t k) {
  require_algorithm(spec, {Algorithm::adam}, "step_adam");
  if (!(spec.epsilon > 0.0)) throw DomainError("step_adam: epsilon must be positive");
  Evaluation ev = evaluate(state, task, spec, k);
  const double c = checked_decay_factor(ev.record.eta, spec.lambda, "step_adam");
  ev.record.decay_factor = c;
  const std::size_t depth = ev.params.size();
  const bool fresh = moments.first.empty();
  if (!fresh && (moments.first.size() != depth || moments.second.size() != depth)) {
    throw ShapeError("step_adam: moment buffers do not match the state");
  }

  AdamMoments next;
  next.count = moments.count + 1;
  const double t = static_cast<double>(next.count);
  const double first_correction = 1.0 - std::pow(spec.beta1, t);
  const double second_correction = 1.0 - std::pow(spec.beta2, t);
  for (std::size_t j = 0; j < depth; ++j) {
    const Matrix& h = ev.record.layer_grads[j];
    Matrix m = fresh ? Matrix(h.rows(), h.cols()) : moments.first[j];
    Matrix v = fresh ? Matrix(h.rows(), h.cols()) : moments.second[j];
    if (!m.same_shape(h) || !v.same_shape(h)) {
      throw ShapeError("step_adam: moment shape " + m.shape_string() + " vs factor " +
                       h.shape_string());
    }
    Matrix direction(h.rows(), h.cols());
    auto me = m.entries();
    auto ve = v.entries();
    auto de = direction.entries();
    const auto he = h.entries();
    for (std::size_t i = 0; i < he.size(); ++i) {
      me[i] = spec.beta1 * me[i] + (1.0 - spec.beta1) * he[i];
      ve[i] = spec.beta2 * ve[i] + (1.0 - spec.beta2) * he[i] * he[i];
      const double m_hat = me[i] / first_correction;
      const double v_hat = ve[i] / second_correction;
      de[i] = m_hat / (std::sqrt(v_hat) + spec.epsilon);
    }
    next.first.push_back(std::move(m));
    next.second.push_back(std::move(v));
    ev.record.directions.push_back(std::move(direction));
  }
  ModelState updated =
      apply_update(state, std::move(ev.params), ev.record.directions, c, ev.record.eta, k);
  return {std::move(updated), std::move(next), std::move(ev.record)};
}

Optimizer::Optimizer(OptimizerSpec spec) : spec_(std::move(spec)) { validate(spec_); }

StepResult Optimizer::step(const ModelState& state, const QuadraticTask& task,
                           std::int64_t k) {
  switch (spec_.algorithm) {
    case Algorithm::gd:
    case Algorithm::sgd:
      if (spec_.lambda == 0.0) return step_gd(state, task, spec_, k);
      return step_weight_decay(state, task, spec_, k);
    case Algorithm::gd_weight_decay:
      return step_weight_decay(state, task, spec_, k);
    case Algorithm::precond_gd:
      return step_precond(state, task, spec_, k);
    case Algorithm::momentum_sgd: {
      MomentumStepResult r = step_momentum(state, velocity_, task, spec_, k);
      velocity_ = std::move(r.velocity);
      return {std::move(r.state), std::move(r.record)};
    }
    case Algorithm::adam: {
      AdamStepResult r = step_adam(state, moments_, task, spec_, k);
      moments_ = std::move(r.moments);
      return {std::move(r.state), std::move(r.record)};
    }
  }
  throw DomainError("Optimizer: unknown algorithm");
}

}  // namespace memclock
