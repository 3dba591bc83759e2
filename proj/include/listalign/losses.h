// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
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

// Supervision objectives over the scores of one list, with analytic
// gradients with respect to each score. Each loss is templated on the
// floating-point type: training uses double, and the finite-difference
// checker evaluates the numeric side in long double so its rounding noise
// stays well below the tolerance even for near-zero gradient coordinates.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "listalign/corpus.h"

namespace listalign {

enum class LossType { kListMle, kBpo, kBce };

/// Command-line spelling: "lipo" | "bpo" | "bce".
std::string_view loss_name(LossType type);
/// Accepts "lipo", "listmle", "bpo", "bce".
LossType parse_loss_type(std::string_view name);

/// Gold ratings at or below this are unsafe.
inline constexpr double kUnsafeThreshold = 2.5;

template <std::floating_point T>
struct BasicLossResult {
  T value = 0;
  std::vector<T> grad;   // d value / d score_k (or d logit_k)
  bool skipped = false;  // the list carries no signal for this objective
};

using LossResult = BasicLossResult<double>;

template <std::floating_point T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// log(1 + exp(x)) without overflow.
template <std::floating_point T>
T softplus(T x) {
  return std::max(x, T(0)) + std::log1p(std::exp(-std::fabs(x)));
}

/// BCE logits are reported on the rating scale as 1 + 4 * sigmoid(logit).
inline double bce_to_scale(double logit) { return 1.0 + 4.0 * sigmoid(logit); }

/// Indices by descending gold; ties keep ascending index order, which is
/// ascending scenario_id for items of a ListGroup.
std::vector<std::size_t> target_permutation(std::span<const double> gold);

/// Negative log Plackett-Luce likelihood of `order` (best first).
template <std::floating_point T>
BasicLossResult<T> listmle_permutation_loss(std::span<const T> scores,
                                            std::span<const std::size_t> order);

template <std::floating_point T>
BasicLossResult<T> listmle_loss(std::span<const T> scores, std::span<const double> gold);

/// Mean over ordered pairs (gold_i > gold_j) of -log sigmoid(s_i - s_j).
template <std::floating_point T>
BasicLossResult<T> bpo_loss(std::span<const T> scores, std::span<const double> gold);

/// Mean binary cross-entropy with label 1 iff gold > 2.5; scores are logits.
template <std::floating_point T>
BasicLossResult<T> bce_loss(std::span<const T> scores, std::span<const double> gold);

template <std::floating_point T>
BasicLossResult<T> mse_aux_loss(std::span<const T> scores, std::span<const double> gold);

/// Softmax cross-entropy over the three modality logits.
template <std::floating_point T>
BasicLossResult<T> modality_loss(std::span<const T> logits, Modality label);

#define LISTALIGN_DECLARE_LOSSES(T)                                                    \
  extern template BasicLossResult<T> listmle_permutation_loss<T>(                     \
      std::span<const T>, std::span<const std::size_t>);                              \
  extern template BasicLossResult<T> listmle_loss<T>(std::span<const T>,               \
                                                     std::span<const double>);         \
  extern template BasicLossResult<T> bpo_loss<T>(std::span<const T>,                   \
                                                 std::span<const double>);             \
  extern template BasicLossResult<T> bce_loss<T>(std::span<const T>,                   \
                                                 std::span<const double>);             \
  extern template BasicLossResult<T> mse_aux_loss<T>(std::span<const T>,               \
                                                     std::span<const double>);         \
  extern template BasicLossResult<T> modality_loss<T>(std::span<const T>, Modality);

LISTALIGN_DECLARE_LOSSES(double)
LISTALIGN_DECLARE_LOSSES(long double)
#undef LISTALIGN_DECLARE_LOSSES

/// Dispatch on the main objective.
LossResult main_loss(LossType type, std::span<const double> scores,
                     std::span<const double> gold);

/// Central-difference audit of an analytic gradient. `loss` must be callable
/// with std::span<const double> and std::span<const long double>; the analytic
/// gradient comes from the double call. Returns the maximum over coordinates
/// of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
template <class Loss>
double finite_diff_check(Loss&& loss, std::span<const double> x, double eps) {
  const auto analytic = loss(x);
  std::vector<long double> probe(x.begin(), x.end());
  const long double step = eps;
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const long double saved = probe[k];
    probe[k] = saved + step;
    const long double up = loss(std::span<const long double>(probe)).value;
    probe[k] = saved - step;
    const long double down = loss(std::span<const long double>(probe)).value;
    probe[k] = saved;
    const double numeric = static_cast<double>((up - down) / (2 * step));
    const double a = analytic.grad[k];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

enum class LossOp { kListMle, kBpo, kBce, kMse };

double finite_diff_check(LossOp op, std::span<const double> scores,
                         std::span<const double> gold, double eps);

/// Same audit for the modality head's cross-entropy.
double finite_diff_check_modality(std::span<const double> logits, Modality label,
                                  double eps);

}  // namespace listalign
