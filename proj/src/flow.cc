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

#include "memclock/flow.h"

#include <cmath>
#include <string>

#include "memclock/error.h"

namespace memclock {
namespace {

using Params = std::vector<Matrix>;

Params velocity_field(const ModelState& like, const Params& params,
                      const QuadraticTask& task, double lambda) {
  const ModelState state = with_parameters(like, params);
  const LossGrad lg = loss_and_product_grad(state, task, task.full_batch());
  Params out = layer_grads(state, lg.product_grad);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] *= -1.0;
    if (lambda != 0.0) out[j] -= lambda * params[j];
  }
  return out;
}

Params axpy(const Params& x, double a, const Params& y) {
  Params out = x;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += a * y[j];
  return out;
}

}  // namespace

FlowTrajectory flow_integrate(const ModelState& state, const QuadraticTask& task,
                              double lambda, double t_end, double h,
                              std::size_t record_every) {
  if (!(h > 0.0)) throw DomainError("flow_integrate: step h must be positive");
  if (!(t_end >= 0.0)) throw DomainError("flow_integrate: t_end must be >= 0");
  if (!(lambda >= 0.0)) throw DomainError("flow_integrate: lambda must be >= 0");
  if (record_every == 0) record_every = 1;
  validate(state);

  FlowTrajectory traj;
  traj.times.push_back(0.0);
  traj.imbalances.push_back(imbalance(state));

  Params w = parameters(state);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  double t = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double dt = (n + 1 == steps) ? t_end - static_cast<double>(n) * h : h;
    const Params k1 = velocity_field(state, w, task, lambda);
    const Params k2 = velocity_field(state, axpy(w, 0.5 * dt, k1), task, lambda);
    const Params k3 = velocity_field(state, axpy(w, 0.5 * dt, k2), task, lambda);
    const Params k4 = velocity_field(state, axpy(w, dt, k3), task, lambda);
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto we = w[j].entries();
      const auto e1 = k1[j].entries();
      const auto e2 = k2[j].entries();
      const auto e3 = k3[j].entries();
      const auto e4 = k4[j].entries();
      for (std::size_t i = 0; i < we.size(); ++i) {
        we[i] += dt / 6.0 * (e1[i] + 2.0 * e2[i] + 2.0 * e3[i] + e4[i]);
      }
    }
    t = (n + 1 == steps) ? t_end : static_cast<double>(n + 1) * h;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double norm = frobenius_norm(w[j]);
      if (!std::isfinite(norm) || norm > kBlowUpNorm) {
        throw DivergenceError("flow_integrate: factor " + std::to_string(j + 1) +
                                  " blew up",
                              t);
      }
    }
    if ((n + 1) % record_every == 0 || n + 1 == steps) {
      traj.times.push_back(t);
      traj.imbalances.push_back(imbalance(with_parameters(state, w)));
    }
  }
  traj.final_state = with_parameters(state, std::move(w));
  return traj;
}

}  // namespace memclock
