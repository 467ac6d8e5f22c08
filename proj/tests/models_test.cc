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
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "memclock/error.h"
#include "memclock/rng.h"

namespace memclock {
namespace {

// Central differences of the full-batch loss along every parameter entry.
std::vector<Matrix> numeric_grads(const ModelState& state, const QuadraticTask& task) {
  const double h = 1e-6;
  std::vector<Matrix> params = parameters(state);
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < params.size(); ++j) {
    Matrix g(params[j].rows(), params[j].cols());
    for (std::size_t i = 0; i < params[j].size(); ++i) {
      std::vector<Matrix> plus = params, minus = params;
      plus[j].entries()[i] += h;
      minus[j].entries()[i] -= h;
      const double lp = full_loss(with_parameters(state, plus), task);
      const double lm = full_loss(with_parameters(state, minus), task);
      g.entries()[i] = (lp - lm) / (2.0 * h);
    }
    out.push_back(g);
  }
  return out;
}

void expect_grads_match(const ModelState& state, const QuadraticTask& task) {
  const LossGrad lg = loss_and_product_grad(state, task, task.full_batch());
  const std::vector<Matrix> analytic = layer_grads(state, lg.product_grad);
  const std::vector<Matrix> numeric = numeric_grads(state, task);
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t j = 0; j < analytic.size(); ++j) {
    ASSERT_TRUE(analytic[j].same_shape(numeric[j]));
    for (std::size_t i = 0; i < analytic[j].size(); ++i) {
      const double a = analytic[j].entries()[i];
      EXPECT_NEAR(a, numeric[j].entries()[i], 1e-6 * (1.0 + std::abs(a)))
          << "factor " << j << " entry " << i;
    }
  }
}

TEST(ModelsTest, ScalarLossAndGradient) {
  const QuadraticTask task = QuadraticTask::scalar({0.0, 1.0, 2.0});
  const ModelState s = ScalarState{1.0, 6.0};
  const LossGrad lg = loss_and_product_grad(s, task, {1});
  EXPECT_DOUBLE_EQ(lg.loss, 25.0);              // (6 - 1)^2
  EXPECT_DOUBLE_EQ(lg.product_grad(0, 0), 10.0);  // 2 (6 - 1)
  // Full batch: mean of (6 - y)^2 over {0, 1, 2} = (36 + 25 + 16) / 3.
  EXPECT_DOUBLE_EQ(full_loss(s, task), 77.0 / 3.0);
  const auto h = layer_grads(s, lg.product_grad);
  EXPECT_DOUBLE_EQ(h[0](0, 0), 60.0);  // g * b
  EXPECT_DOUBLE_EQ(h[1](0, 0), 10.0);  // g * a
  expect_grads_match(s, task);
}

TEST(ModelsTest, TwoFactorGradientMatchesFiniteDifferences) {
  const QuadraticTask task = planted_regression_task(4, 3, 10, 5, 0.2);
  const ModelState s = init_state({1.0, 9, InitScheme::fan_in_normal, {}},
                                  {ModelKind::two_factor, {4, 2, 3}});
  expect_grads_match(s, task);
}

TEST(ModelsTest, DeepGradientMatchesFiniteDifferences) {
  const QuadraticTask task = planted_regression_task(3, 2, 8, 6, 0.2);
  for (std::vector<std::size_t> dims :
       {std::vector<std::size_t>{3, 2}, {3, 4, 2}, {3, 2, 3, 2}, {3, 3, 1, 2, 2}}) {
    if (dims.size() < 3) continue;
    const ModelState s =
        init_state({1.2, 4, InitScheme::fan_in_normal, {}}, {ModelKind::deep_linear, dims});
    expect_grads_match(s, task);
  }
}

TEST(ModelsTest, ProductFoldsLayersInOrder) {
  Rng rng(1);
  DeepLinearState s;
  for (auto [r, c] : {std::pair{3, 2}, std::pair{4, 3}, std::pair{2, 4}}) {
    Matrix w(r, c);
    for (double& x : w.entries()) x = rng.normal();
    s.layers.push_back(w);
  }
  const Matrix expect = s.layers[2] * (s.layers[1] * s.layers[0]);
  EXPECT_LT(frobenius_distance(product(s), expect), 1e-13);
  const ModelState m = s;
  EXPECT_EQ(product(m), product(s));

  const TwoFactorState t{Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}})};
  EXPECT_DOUBLE_EQ(product(t)(0, 0), 11.0);
  EXPECT_DOUBLE_EQ(product(ScalarState{2.0, 3.0}), 6.0);
}

TEST(ModelsTest, ParametersRoundTrip) {
  const ModelState s = init_state({1.0, 2, InitScheme::fan_in_normal, {}},
                                  {ModelKind::deep_linear, {2, 3, 3, 2}});
  const ModelState back = with_parameters(s, parameters(s));
  EXPECT_EQ(std::get<DeepLinearState>(back), std::get<DeepLinearState>(s));
  EXPECT_THROW(with_parameters(s, {Matrix(2, 2)}), ShapeError);
  double sq = 0.0;
  for (const Matrix& w : parameters(s)) sq += squared_frobenius_norm(w);
  EXPECT_NEAR(total_norm(s), std::sqrt(sq), 1e-14);
}

TEST(ModelsTest, ValidateRejectsBrokenChains) {
  const ModelState bad = TwoFactorState{Matrix(3, 2), Matrix(3, 4)};
  EXPECT_THROW(validate(bad), ShapeError);
  const ModelState short_chain = DeepLinearState{{Matrix(2, 2)}};
  EXPECT_THROW(validate(short_chain), ShapeError);
}

TEST(ModelsTest, CyclicBatches) {
  const QuadraticTask task = QuadraticTask::scalar({0, 1, 2, 3, 4}, Sampling::cyclic, 2);
  EXPECT_EQ(task.select_batch(0), (Batch{0, 1}));
  EXPECT_EQ(task.select_batch(1), (Batch{2, 3}));
  EXPECT_EQ(task.select_batch(2), (Batch{4, 0}));
  EXPECT_EQ(task.batch_size(), 2u);
  const QuadraticTask full = QuadraticTask::scalar({0, 1, 2});
  EXPECT_EQ(full.select_batch(17), (Batch{0, 1, 2}));
  EXPECT_EQ(full.batch_size(), 3u);
}

TEST(ModelsTest, SeededUniformBatchesArePureFunctionsOfStep) {
  const QuadraticTask task =
      QuadraticTask::scalar(std::vector<double>(10, 0.0), Sampling::seeded_uniform, 4, 77);
  for (std::int64_t k : {0, 5, 1000, 3}) {
    Rng rng(Rng::derive(77, static_cast<std::uint64_t>(k)));
    Batch expect;
    for (int i = 0; i < 4; ++i) expect.push_back(rng.below(10));
    EXPECT_EQ(task.select_batch(k), expect);
  }
  EXPECT_EQ(task.select_batch(5), task.select_batch(5));
  EXPECT_NE(task.select_batch(5), task.resampled(Sampling::seeded_uniform, 4, 78).select_batch(5));
}

TEST(ModelsTest, LossErrors) {
  const QuadraticTask task = QuadraticTask::scalar({1.0});
  EXPECT_THROW(loss_and_product_grad(ScalarState{1, 1}, task, {}), ShapeError);
  EXPECT_THROW(loss_and_product_grad(ScalarState{1, 1}, task, {3}), ShapeError);
  const QuadraticTask reg = planted_regression_task(3, 2, 5, 1, 0.0);
  const ModelState wrong = TwoFactorState{Matrix(3, 2), Matrix(2, 3)};
  EXPECT_THROW(full_loss(wrong, reg), ShapeError);
  EXPECT_THROW(QuadraticTask::scalar({1.0, 2.0}, Sampling::cyclic, 3), DomainError);
  EXPECT_THROW(QuadraticTask::scalar({}), ShapeError);
}

TEST(ModelsTest, FanInInitVariance) {
  const double sigma = 1.7;
  const ModelState s = init_state({sigma, 3, InitScheme::fan_in_normal, {}},
                                  {ModelKind::two_factor, {100, 150, 120}});
  const auto& t = std::get<TwoFactorState>(s);
  // U is d_out x r with fan-in r; V is r x d_in with fan-in d_in.
  for (const auto& [w, fan_in] : {std::pair{&t.u, 150.0}, std::pair{&t.v, 100.0}}) {
    double sum = 0.0, sum_sq = 0.0;
    const double n = static_cast<double>(w->size());
    for (double x : w->entries()) {
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    EXPECT_NEAR(var / (sigma * sigma / fan_in), 1.0, 0.03);
  }
  EXPECT_EQ(t.u.rows(), 120u);
  EXPECT_EQ(t.v.cols(), 100u);
}

TEST(ModelsTest, ExplicitInitIsScaledBySigma) {
  const ModelState s = init_state({2.0, 0, InitScheme::explicit_values, {1.0, 6.0}},
                                  {ModelKind::scalar, {}});
  EXPECT_EQ(std::get<ScalarState>(s).a, 2.0);
  EXPECT_EQ(std::get<ScalarState>(s).b, 12.0);
  EXPECT_THROW(init_state({1.0, 0, InitScheme::explicit_values, {1.0}}, {ModelKind::scalar, {}}),
               ShapeError);
  EXPECT_THROW(init_state({0.0, 0, InitScheme::fan_in_normal, {}}, {ModelKind::scalar, {}}),
               DomainError);
  EXPECT_THROW(init_state({1.0, 0, InitScheme::fan_in_normal, {}}, {ModelKind::two_factor, {2}}),
               ShapeError);
}

TEST(ModelsTest, InitIsDeterministic) {
  const ModelShape shape{ModelKind::deep_linear, {3, 4, 4, 2}};
  const ModelState a = init_state({1.0, 8, InitScheme::fan_in_normal, {}}, shape);
  const ModelState b = init_state({1.0, 8, InitScheme::fan_in_normal, {}}, shape);
  const ModelState c = init_state({1.0, 9, InitScheme::fan_in_normal, {}}, shape);
  EXPECT_EQ(std::get<DeepLinearState>(a), std::get<DeepLinearState>(b));
  EXPECT_NE(std::get<DeepLinearState>(a), std::get<DeepLinearState>(c));
}

}  // namespace
}  // namespace memclock
