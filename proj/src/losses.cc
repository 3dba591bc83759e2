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

#include "listalign/losses.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "listalign/errors.h"

namespace listalign {

namespace {

template <std::floating_point T>
void require_finite(std::span<const T> scores, std::span<const double> gold) {
  for (T s : scores) {
    if (!std::isfinite(s)) throw ValidationError("scores", "non-finite score");
  }
  for (double g : gold) {
    if (!std::isfinite(g)) throw ValidationError("gold", "non-finite gold rating");
  }
}

template <std::floating_point T>
void require_same_length(std::span<const T> scores, std::span<const double> gold) {
  if (scores.size() != gold.size()) {
    throw DimensionError("scores and gold differ in length (" +
                         std::to_string(scores.size()) + " vs " +
                         std::to_string(gold.size()) + ")");
  }
  if (scores.empty()) throw DimensionError("empty list");
}

template <std::floating_point T>
T log_add_exp(T a, T b) {
  const T hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace

std::string_view loss_name(LossType type) {
  switch (type) {
    case LossType::kListMle:
      return "lipo";
    case LossType::kBpo:
      return "bpo";
    case LossType::kBce:
      return "bce";
  }
  return "lipo";
}

LossType parse_loss_type(std::string_view name) {
  if (name == "lipo" || name == "listmle") return LossType::kListMle;
  if (name == "bpo") return LossType::kBpo;
  if (name == "bce") return LossType::kBce;
  throw ValidationError("loss", "unknown loss '" + std::string(name) +
                                    "' (expected lipo|bpo|bce)");
}

std::vector<std::size_t> target_permutation(std::span<const double> gold) {
  std::vector<std::size_t> order(gold.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gold[a] > gold[b]; });
  return order;
}

template <std::floating_point T>
BasicLossResult<T> listmle_permutation_loss(std::span<const T> scores,
                                            std::span<const std::size_t> order) {
  const std::size_t n = scores.size();
  if (order.size() != n) throw DimensionError("permutation length mismatch");
  for (T s : scores) {
    if (!std::isfinite(s)) throw ValidationError("scores", "non-finite score");
  }
  BasicLossResult<T> out;
  out.grad.assign(n, T(0));
  if (n <= 1) {
    out.skipped = true;
    return out;
  }

  // lse[t] = log sum_{j >= t} exp(s[order[j]])
  std::vector<T> lse(n);
  lse[n - 1] = scores[order[n - 1]];
  for (std::size_t t = n - 1; t-- > 0;) {
    lse[t] = log_add_exp(scores[order[t]], lse[t + 1]);
  }
  T value = 0;
  for (std::size_t t = 0; t < n; ++t) value += lse[t] - scores[order[t]];
  out.value = value;

  // d/ds[order[j]] = -(1 - p_j) + sum_{t<j} p_t(order[j]), where p_t(i) is the
  // softmax weight of item i among positions t..n-1 and 1 - p_j equals
  // exp(lse[j+1] - lse[j]).
  for (std::size_t j = 0; j < n; ++j) {
    const T s = scores[order[j]];
    T g = (j + 1 < n) ? -std::exp(lse[j + 1] - lse[j]) : T(0);
    for (std::size_t t = 0; t < j; ++t) g += std::exp(s - lse[t]);
    out.grad[order[j]] = g;
  }
  return out;
}

template <std::floating_point T>
BasicLossResult<T> listmle_loss(std::span<const T> scores, std::span<const double> gold) {
  require_same_length(scores, gold);
  require_finite(scores, gold);
  const auto order = target_permutation(gold);
  return listmle_permutation_loss(scores, std::span<const std::size_t>(order));
}

template <std::floating_point T>
BasicLossResult<T> bpo_loss(std::span<const T> scores, std::span<const double> gold) {
  require_same_length(scores, gold);
  require_finite(scores, gold);
  const std::size_t n = scores.size();
  BasicLossResult<T> out;
  out.grad.assign(n, T(0));

  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (gold[i] > gold[j]) ++pairs;
    }
  }
  if (pairs == 0) {
    out.skipped = true;
    return out;
  }
  const T inv = T(1) / static_cast<T>(pairs);
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(gold[i] > gold[j])) continue;
      const T d = scores[i] - scores[j];
      total += softplus(-d);
      const T g = sigmoid(-d) * inv;
      out.grad[i] -= g;
      out.grad[j] += g;
    }
  }
  out.value = total * inv;
  return out;
}

template <std::floating_point T>
BasicLossResult<T> bce_loss(std::span<const T> scores, std::span<const double> gold) {
  require_same_length(scores, gold);
  require_finite(scores, gold);
  const std::size_t n = scores.size();
  const T inv = T(1) / static_cast<T>(n);
  BasicLossResult<T> out;
  out.grad.resize(n);
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T s = scores[i];
    if (gold[i] > kUnsafeThreshold) {
      total += softplus(-s);
      out.grad[i] = -sigmoid(-s) * inv;
    } else {
      total += softplus(s);
      out.grad[i] = sigmoid(s) * inv;
    }
  }
  out.value = total * inv;
  return out;
}

template <std::floating_point T>
BasicLossResult<T> mse_aux_loss(std::span<const T> scores, std::span<const double> gold) {
  require_same_length(scores, gold);
  require_finite(scores, gold);
  const std::size_t n = scores.size();
  const T inv = T(1) / static_cast<T>(n);
  BasicLossResult<T> out;
  out.grad.resize(n);
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T r = scores[i] - static_cast<T>(gold[i]);
    total += r * r;
    out.grad[i] = 2 * r * inv;
  }
  out.value = total * inv;
  return out;
}

template <std::floating_point T>
BasicLossResult<T> modality_loss(std::span<const T> logits, Modality label) {
  if (logits.size() != kNumModalities) {
    throw DimensionError("modality head expects 3 logits, got " +
                         std::to_string(logits.size()));
  }
  for (T l : logits) {
    if (!std::isfinite(l)) throw ValidationError("logits", "non-finite logit");
  }
  const auto y = static_cast<std::size_t>(label);
  T hi = logits[0];
  for (T l : logits) hi = std::max(hi, l);
  T z = 0;
  for (T l : logits) z += std::exp(l - hi);
  const T lse = hi + std::log(z);

  BasicLossResult<T> out;
  out.grad.resize(kNumModalities);
  T rest = 0;  // sum of the non-target softmax weights
  for (std::size_t k = 0; k < kNumModalities; ++k) {
    if (k == y) continue;
    out.grad[k] = std::exp(logits[k] - lse);
    rest += out.grad[k];
  }
  out.grad[y] = -rest;
  if (hi == logits[y]) {
    // Target is the max: log1p keeps precision as the loss approaches 0.
    T others = 0;
    for (std::size_t k = 0; k < kNumModalities; ++k) {
      if (k != y) others += std::exp(logits[k] - logits[y]);
    }
    out.value = std::log1p(others);
  } else {
    out.value = lse - logits[y];
  }
  return out;
}

#define LISTALIGN_INSTANTIATE_LOSSES(T)                                                \
  template BasicLossResult<T> listmle_permutation_loss<T>(std::span<const T>,          \
                                                          std::span<const std::size_t>); \
  template BasicLossResult<T> listmle_loss<T>(std::span<const T>, std::span<const double>); \
  template BasicLossResult<T> bpo_loss<T>(std::span<const T>, std::span<const double>); \
  template BasicLossResult<T> bce_loss<T>(std::span<const T>, std::span<const double>); \
  template BasicLossResult<T> mse_aux_loss<T>(std::span<const T>, std::span<const double>); \
  template BasicLossResult<T> modality_loss<T>(std::span<const T>, Modality);

LISTALIGN_INSTANTIATE_LOSSES(double)
LISTALIGN_INSTANTIATE_LOSSES(long double)
#undef LISTALIGN_INSTANTIATE_LOSSES

LossResult main_loss(LossType type, std::span<const double> scores,
                     std::span<const double> gold) {
  switch (type) {
    case LossType::kListMle:
      return listmle_loss(scores, gold);
    case LossType::kBpo:
      return bpo_loss(scores, gold);
    case LossType::kBce:
      return bce_loss(scores, gold);
  }
  return listmle_loss(scores, gold);
}

double finite_diff_check(LossOp op, std::span<const double> scores,
                         std::span<const double> gold, double eps) {
  if (!(eps > 0.0)) throw ValidationError("eps", "eps must be positive");
  auto run = [&](auto&& fn) {
    return finite_diff_check(
        [&](auto x) { return fn(x, gold); }, scores, eps);
  };
  switch (op) {
    case LossOp::kListMle:
      return run([](auto x, auto g) { return listmle_loss(x, g); });
    case LossOp::kBpo:
      return run([](auto x, auto g) { return bpo_loss(x, g); });
    case LossOp::kBce:
      return run([](auto x, auto g) { return bce_loss(x, g); });
    case LossOp::kMse:
      return run([](auto x, auto g) { return mse_aux_loss(x, g); });
  }
  return 0.0;
}

double finite_diff_check_modality(std::span<const double> logits, Modality label,
                                  double eps) {
  if (!(eps > 0.0)) throw ValidationError("eps", "eps must be positive");
  return finite_diff_check([&](auto x) { return modality_loss(x, label); }, logits, eps);
}

}  // namespace listalign
