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

#include "memclock/conservation.h"

#include <cmath>
#include <string>
#include <variant>

#include "memclock/error.h"

namespace memclock {
namespace {

// Factors rewritten so that every pair reads D_j = X_j X_j^T - Y_j^T Y_j with
// X_j = chain[j] and Y_j = chain[j + 1]. Two-factor states become
// (U^T, V^T); the scalar model is (a, b).
std::vector<Matrix> imbalance_chain(const ModelState& state) {
  if (const auto* s = std::get_if<TwoFactorState>(&state)) {
    return {transpose(s->u), transpose(s->v)};
  }
  return parameters(state);
}

// Same reorientation for per-factor update directions.
std::vector<Matrix> oriented_directions(const ModelState& state,
                                        const std::vector<Matrix>& directions) {
  if (std::holds_alternative<TwoFactorState>(state)) {
    if (directions.size() != 2) {
      throw ShapeError("two-factor state takes two update directions");
    }
    return {transpose(directions[0]), transpose(directions[1])};
  }
  return directions;
}

Matrix pair_imbalance(const Matrix& x, const Matrix& y) {
  return x * transpose(x) - transpose(y) * y;
}

void require_same_kind(const ModelState& before, const ModelState& after) {
  if (before.index() != after.index()) {
    throw ShapeError("before/after states are different model kinds");
  }
  const auto pb = parameters(before);
  const auto pa = parameters(after);
  if (pb.size() != pa.size()) throw ShapeError("before/after states differ in depth");
  for (std::size_t j = 0; j < pb.size(); ++j) {
    if (!pb[j].same_shape(pa[j])) {
      throw ShapeError("factor " + std::to_string(j + 1) + " changed shape from " +
                       pb[j].shape_string() + " to " + pa[j].shape_string());
    }
  }
}

}  // namespace

std::vector<Matrix> second_order_bracket(const ModelState& state, const Matrix& g) {
  if (const auto* s = std::get_if<ScalarState>(&state)) {
    if (g.size() != 1) throw ShapeError("scalar model needs a 1x1 gradient");
    const double gv = g(0, 0);
    return {Matrix::scalar(gv * gv * (s->b * s->b - s->a * s->a))};
  }
  if (const auto* s = std::get_if<TwoFactorState>(&state)) {
    if (g.rows() != s->u.rows() || g.cols() != s->v.cols()) {
      throw ShapeError("gradient " + g.shape_string() + " does not match the product");
    }
    const Matrix gt = transpose(g);
    return {s->v * gt * g * transpose(s->v) - transpose(s->u) * g * gt * s->u};
  }
  const auto& w = std::get<DeepLinearState>(state).layers;
  const std::size_t depth = w.size();
  if (g.rows() != w.back().rows() || g.cols() != w.front().cols()) {
    throw ShapeError("gradient " + g.shape_string() + " does not match the product");
  }
  // H_j from explicit folds for each j.
  std::vector<Matrix> h(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    Matrix after = Matrix::identity(w.back().rows());
    for (std::size_t i = depth - 1; i > j; --i) after = after * w[i];
    Matrix before = Matrix::identity(w.front().cols());
    for (std::size_t i = 0; i < j; ++i) before = w[i] * before;
    h[j] = transpose(after) * g * transpose(before);
  }
  std::vector<Matrix> out;
  for (std::size_t j = 0; j + 1 < depth; ++j) {
    out.push_back(h[j] * transpose(h[j]) - transpose(h[j + 1]) * h[j + 1]);
  }
  return out;
}

double ImbalanceRecord::total_frobenius() const {
  double sum = 0.0;
  for (double f : frobenius) sum += f * f;
  return std::sqrt(sum);
}

ImbalanceRecord imbalance(const ModelState& state) {
  validate(state);
  const std::vector<Matrix> chain = imbalance_chain(state);
  ImbalanceRecord rec;
  for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
    rec.pairs.push_back(pair_imbalance(chain[j], chain[j + 1]));
    rec.frobenius.push_back(frobenius_norm(rec.pairs.back()));
  }
  if (const auto* s = std::get_if<ScalarState>(&state)) {
    rec.scalar = s->a * s->a - s->b * s->b;
    rec.pairs.front()(0, 0) = *rec.scalar;
  }
  return rec;
}

std::vector<double> leakage_residual(const ModelState& before, const ModelState& after,
                                     const Matrix& product_grad, double eta, double lambda,
                                     LeakageTerms terms) {
  require_same_kind(before, after);
  const ImbalanceRecord d_before = imbalance(before);
  const ImbalanceRecord d_after = imbalance(after);
  const double c = 1.0 - eta * lambda;
  std::vector<Matrix> bracket;
  if (terms == LeakageTerms::full) bracket = second_order_bracket(before, product_grad);

  std::vector<double> out;
  for (std::size_t j = 0; j < d_before.pairs.size(); ++j) {
    Matrix r = d_after.pairs[j] - (c * c) * d_before.pairs[j];
    if (terms == LeakageTerms::full) r -= (eta * eta) * bracket[j];
    out.push_back(frobenius_norm(r));
  }
  return out;
}

std::vector<Matrix> first_order_imbalance_change(const ModelState& state,
                                                 const std::vector<Matrix>& directions,
                                                 double eta, double lambda) {
  const std::vector<Matrix> w = imbalance_chain(state);
  const std::vector<Matrix> q = oriented_directions(state, directions);
  if (q.size() != w.size()) {
    throw ShapeError("expected " + std::to_string(w.size()) + " directions, got " +
                     std::to_string(q.size()));
  }
  const double c = 1.0 - eta * lambda;
  std::vector<Matrix> out;
  for (std::size_t j = 0; j + 1 < w.size(); ++j) {
    Matrix first = q[j] * transpose(w[j]) + w[j] * transpose(q[j]) -
                   transpose(q[j + 1]) * w[j + 1] - transpose(w[j + 1]) * q[j + 1];
    out.push_back((-c * eta) * first);
  }
  return out;
}

std::vector<double> preconditioned_residual(const ModelState& before,
                                            const ModelState& after,
                                            const std::vector<Matrix>& directions,
                                            double eta, double lambda) {
  require_same_kind(before, after);
  const ImbalanceRecord d_before = imbalance(before);
  const ImbalanceRecord d_after = imbalance(after);
  const std::vector<Matrix> q = oriented_directions(before, directions);
  const std::vector<Matrix> first =
      first_order_imbalance_change(before, directions, eta, lambda);
  const double c = 1.0 - eta * lambda;

  std::vector<double> out;
  for (std::size_t j = 0; j < d_before.pairs.size(); ++j) {
    const Matrix second = q[j] * transpose(q[j]) - transpose(q[j + 1]) * q[j + 1];
    Matrix r = d_after.pairs[j] - (c * c) * d_before.pairs[j] - first[j] -
               (eta * eta) * second;
    out.push_back(frobenius_norm(r));
  }
  return out;
}

NormPrediction scalar_norm_prediction(double d0, double p_star) {
  return {std::sqrt(d0 * d0 + 4.0 * p_star * p_star), p_star};
}

Matrix decay_prediction(const Matrix& d0, double lambda, double t) {
  if (!(lambda >= 0.0) || !(t >= 0.0)) {
    throw DomainError("decay_prediction: lambda and t must be nonnegative");
  }
  return std::exp(-2.0 * lambda * t) * d0;
}

double decay_prediction(double d0, double lambda, double t) {
  return decay_prediction(Matrix::scalar(d0), lambda, t)(0, 0);
}

}  // namespace memclock
