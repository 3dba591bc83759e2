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
#include "listalign/adamw.h"

#include <gtest/gtest.h>

#include "listalign/errors.h"

namespace listalign {
namespace {

TEST(AdamW, MatchesReferenceTrajectory) {
  // Reference trajectory from torch.optim.AdamW in float64 with the same
  // hyperparameters and gradients.
  std::vector<double> p = {0.5, -1.0, 2.0};
  AdamWState st;
  AdamWHyper h;
  h.lr = 0.1;
  h.weight_decay = 0.01;
  const std::vector<std::vector<double>> grads = {{1.0, -2.0, 0.5}, {0.3, 0.0, -1.5}, {-0.7, 4.0, 0.25}};
  const std::vector<std::vector<double>> want = {
      {0.399500001, -0.8990000005, 1.8980000019999999},
      {0.3135307838574528, -0.8310951755597673, 1.94552098488578},
      {0.2938923870452922, -0.8642675272914525, 1.9713252829741954}};
  for (std::size_t t = 0; t < 3; ++t) {
    adamw_step(p, grads[t], st, h);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], want[t][i], 1e-12) << t << "," << i;
  }
  EXPECT_EQ(st.step, 3u);
}

TEST(AdamW, DecoupledDecayWithZeroGradient) {
  std::vector<double> p = {2.0};
  AdamWState st;
  AdamWHyper h;
  h.lr = 0.5;
  h.weight_decay = 0.1;
  adamw_step(p, std::vector<double>{0.0}, st, h);
  EXPECT_DOUBLE_EQ(p[0], 2.0 * (1.0 - 0.05));
}

TEST(AdamW, ShapeMismatch) {
  std::vector<double> p = {1.0, 2.0};
  AdamWState st;
  EXPECT_THROW(adamw_step(p, std::vector<double>{1.0}, st, {}), DimensionError);
  adamw_step(p, std::vector<double>{1.0, 1.0}, st, {});
  std::vector<double> q = {1.0};
  EXPECT_THROW(adamw_step(q, std::vector<double>{1.0}, st, {}), DimensionError);
}

}  // namespace
}  // namespace listalign
