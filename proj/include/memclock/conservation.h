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

#ifndef MEMCLOCK_CONSERVATION_H_
#define MEMCLOCK_CONSERVATION_H_

#include <optional>
#include <vector>

#include "memclock/matrix.h"
#include "memclock/models.h"

namespace memclock {

// Adjacent-layer imbalances.
//
//   scalar      D   = a^2 - b^2                        (one 1x1 pair)
//   two-factor  D   = U^T U - V V^T                    (r x r)
//   deep        D_j = W_j W_j^T - W_{j+1}^T W_{j+1}    (d_j x d_j), j < L
//
// Note the orientation: a deep net with L = 2 and (W_1, W_2) = (V, U) has
// D_1 = -D(U, V).
struct ImbalanceRecord {
  std::vector<Matrix> pairs;
  std::vector<double> frobenius;
  // Set for the scalar model.
  std::optional<double> scalar;

  // sqrt(sum_j ||D_j||_F^2).
  double total_frobenius() const;
};

ImbalanceRecord imbalance(const ModelState& state);

enum class LeakageTerms {
  // D' - c^2 D - eta^2 * (second-order bracket)
  full,
  // D' - c^2 D only; what is left is the second-order leakage itself.
  without_second_order,
};

// Per-pair Frobenius norm of the Euclidean/coupled-decay identity residual for
// one recorded step from `before` to `after` taken with product gradient
// `product_grad`, rate eta and decay lambda (c = 1 - eta lambda). The bracket
// is evaluated from `before` and G directly, not from the optimizer's layer
// gradients:
//
//   two-factor  V G^T G V^T - U^T G G^T U
//   deep        H_j H_j^T - H_{j+1}^T H_{j+1},  H_j = A_j^T G B_j^T
//   scalar      g^2 (b^2 - a^2)
//
// Throws ShapeError when the states or G do not match.
// The eta^2 coefficient of the Euclidean imbalance change for product-space
// gradient G, per pair, computed from the pre-step state only.
std::vector<Matrix> second_order_bracket(const ModelState& state, const Matrix& product_grad);

std::vector<double> leakage_residual(const ModelState& before, const ModelState& after,
                                     const Matrix& product_grad, double eta,
                                     double lambda = 0.0,
                                     LeakageTerms terms = LeakageTerms::full);

// Residual of the preconditioned identity for W_j' = c W_j - eta Q_j:
//
//   D_j' - c^2 D_j + c eta [Q_j W_j^T + W_j Q_j^T - Q_{j+1}^T W_{j+1} - W_{j+1}^T Q_{j+1}]
//        - eta^2 [Q_j Q_j^T - Q_{j+1}^T Q_{j+1}]
//
// in the deep orientation (the two-factor and scalar forms swap the roles
// accordingly). `directions` are the Q_j in parameters() order.
std::vector<double> preconditioned_residual(const ModelState& before,
                                            const ModelState& after,
                                            const std::vector<Matrix>& directions,
                                            double eta, double lambda = 0.0);

// The first-order bracket alone (times -eta c) for a step along `directions`.
std::vector<Matrix> first_order_imbalance_change(const ModelState& state,
                                                 const std::vector<Matrix>& directions,
                                                 double eta, double lambda = 0.0);

struct NormPrediction {
  // a_inf^2 + b_inf^2 = sqrt(D0^2 + 4 p*^2).
  double predicted_sq_norm = 0.0;
  double target_product = 0.0;
};

NormPrediction scalar_norm_prediction(double d0, double p_star);

// Closed form e^{-2 lambda t} D0 of the decayed flow. Throws DomainError for
// negative lambda or t.
Matrix decay_prediction(const Matrix& d0, double lambda, double t);
double decay_prediction(double d0, double lambda, double t);

}  // namespace memclock

#endif  // MEMCLOCK_CONSERVATION_H_
