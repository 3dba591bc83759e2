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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "listalign/errors.h"
#include "listalign/rng.h"

namespace listalign {
namespace {

using V = std::vector<double>;

// Expected values below come from an independent 40-digit evaluation of the
// loss definitions.

TEST(ListMle, WorkedValues) {
  const V g = {5, 3, 1};
  EXPECT_NEAR(listmle_loss<double>(V{2, 1, 0}, g).value, 0.72086765196260314, 1e-12);
  EXPECT_NEAR(listmle_loss<double>(V{0, 1, 2}, g).value, 3.7208676519626031, 1e-12);
  // Ties in gold keep their input order.
  EXPECT_NEAR(listmle_loss<double>(V{0.3, -1.2, 2.5, 0.7}, V{4, 2, 4, 1}).value,
              4.6763580202047947, 1e-12);
}

TEST(ListMle, ShiftInvariantAndSkipsSingletons) {
  const V g = {4, 2, 5, 1};
  const V s = {0.1, -0.4, 1.3, 0.2};
  V shifted = s;
  for (auto& x : shifted) x += 100.0;
  EXPECT_NEAR(listmle_loss<double>(s, g).value, listmle_loss<double>(shifted, g).value, 1e-9);
  const auto one = listmle_loss<double>(V{3.0}, V{4.0});
  EXPECT_TRUE(one.skipped);
  EXPECT_EQ(one.value, 0.0);
}

TEST(ListMle, StableForLargeScores) {
  const auto r = listmle_loss<double>(V{1000, -1000, 0}, V{1, 5, 3});
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_NEAR(r.value, 3000.0, 1e-9);
}

TEST(ListMle, GradientSumsToZero) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    V s(5), g(5);
    for (auto& x : s) x = rng.uniform(-5, 5);
    for (auto& x : g) x = 1 + static_cast<double>(rng.below(5));
    const auto r = listmle_loss<double>(s, g);
    EXPECT_NEAR(std::accumulate(r.grad.begin(), r.grad.end(), 0.0), 0.0, 1e-12);
  }
}

TEST(TargetPermutation, StableDescending) {
  const auto p = target_permutation(V{2, 5, 2, 4});
  EXPECT_EQ(p, (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(Bpo, WorkedValueAndAllTiedSkip) {
  EXPECT_NEAR(bpo_loss<double>(V{0.3, -1.2, 2.5, 0.7}, V{4, 2, 4, 1}).value,
              0.66624314902510376, 1e-12);
  EXPECT_NEAR(bpo_loss<double>(V{1, 0}, V{5, 1}).value, std::log1p(std::exp(-1.0)), 1e-15);
  // Mean over the three ordered pairs of -log sigmoid(1), -log sigmoid(2), -log sigmoid(1).
  EXPECT_NEAR(bpo_loss<double>(V{1, 0, -1}, V{5, 3, 1}).value, 0.2511504620264728, 1e-12);
  EXPECT_TRUE(bpo_loss<double>(V{1, 0, 2}, V{3, 3, 3}).skipped);
}

TEST(Bce, WorkedValueAndThreshold) {
  EXPECT_NEAR(bce_loss<double>(V{0.3, -1.2, 2.5, 0.7}, V{4, 2, 4, 1}).value,
              0.49992837374614145, 1e-12);
  // Gold exactly 2.5 is unsafe (label 0).
  EXPECT_NEAR(bce_loss<double>(V{0.0}, V{2.5}).value, std::log(2.0), 1e-15);
  EXPECT_GT(bce_loss<double>(V{5.0}, V{2.5}).value, bce_loss<double>(V{5.0}, V{2.6}).value);
  EXPECT_NEAR(bce_to_scale(0.0), 3.0, 1e-15);
}

TEST(Mse, WorkedValue) {
  EXPECT_NEAR(mse_aux_loss<double>(V{0.3, -1.2, 2.5, 0.7}, V{4, 2, 4, 1}).value, 6.5675, 1e-12);
}

TEST(Modality, CrossEntropy) {
  EXPECT_NEAR(modality_loss<double>(V{0.5, -0.25, 1.5}, Modality::kBoth).value,
              0.43285546687876889, 1e-12);
  EXPECT_NEAR(modality_loss<double>(V{0.5, -0.25, 1.5}, Modality::kText).value,
              1.4328554668787689, 1e-12);
  EXPECT_THROW(modality_loss<double>(V{1, 2}, Modality::kText), DimensionError);
}

TEST(Losses, RejectBadInput) {
  EXPECT_THROW(listmle_loss<double>(V{1, 2}, V{1}), DimensionError);
  EXPECT_THROW(bpo_loss<double>(V{}, V{}), DimensionError);
  EXPECT_THROW(bce_loss<double>(V{NAN}, V{3}), ValidationError);
  EXPECT_THROW(mse_aux_loss<double>(V{1}, V{INFINITY}), ValidationError);
}

TEST(Losses, MainLossDispatch) {
  const V s = {0.3, -1.2, 2.5}, g = {4, 2, 1};
  EXPECT_EQ(main_loss(LossType::kBpo, s, g).value, bpo_loss<double>(s, g).value);
  EXPECT_EQ(parse_loss_type("lipo"), LossType::kListMle);
  EXPECT_EQ(parse_loss_type("bpo"), LossType::kBpo);
  EXPECT_EQ(parse_loss_type("bce"), LossType::kBce);
  EXPECT_EQ(loss_name(LossType::kListMle), "lipo");
  EXPECT_THROW(parse_loss_type("hinge"), ValidationError);
}

TEST(Gradients, MatchFiniteDifferences) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(5);
    V s(n), g(n);
    for (auto& x : s) x = rng.uniform(-10, 10);
    for (auto& x : g) x = 1 + static_cast<double>(rng.below(5));
    for (auto op : {LossOp::kListMle, LossOp::kBpo, LossOp::kBce, LossOp::kMse}) {
      EXPECT_LT(finite_diff_check(op, s, g, 1e-5), 1e-5);
    }
    V logits(3);
    for (auto& x : logits) x = rng.uniform(-10, 10);
    EXPECT_LT(finite_diff_check_modality(logits, static_cast<Modality>(rng.below(3)), 1e-5), 1e-5);
  }
}

TEST(PlackettLuce, ProbabilitiesSumToOne) {
  Rng rng(99);
  for (std::size_t n = 2; n <= 5; ++n) {
    V s(n);
    for (auto& x : s) x = rng.uniform(-3, 3);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0;
    do {
      total += std::exp(-listmle_permutation_loss<double>(s, perm).value);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace listalign
