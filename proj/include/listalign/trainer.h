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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"
#include "listalign/adamw.h"
#include "listalign/corpus.h"
#include "listalign/featurizer.h"
#include "listalign/losses.h"
#include "listalign/scorer.h"

namespace listalign {

struct TrainConfig {
  LossType loss = LossType::kListMle;
  double lr = 1e-4;
  int epochs = 5;
  std::size_t list_size = 5;  // m
  double fraction = 1.0;      // f
  /// Unset means 0.1 for the listwise objective and 0 for BPO/BCE.
  std::optional<double> aux_mse_weight;
  double modality_weight = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t hidden = 64;
  std::uint64_t seed = 7;

  double effective_mse_weight() const;
  AdamWHyper adamw() const;
  /// Throws ValidationError naming the field.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

struct TrainResult {
  ScorerParams params;
  std::vector<double> epoch_loss;  // mean total loss over stepped groups
  std::size_t steps = 0;
  std::size_t skipped_groups = 0;  // per epoch
};

/// Listwise training loop: one list per optimizer step, group order reshuffled
/// each epoch from the seed. Training data is first reduced to the configured
/// fraction and then truncated to the configured list size.
TrainResult train(const TrainConfig& config, const std::vector<ListGroup>& train_groups,
                  const Featurizer& featurizer);

/// Raw score-head outputs for every item of a group.
std::vector<double> raw_scores(const ScorerParams& params, const ListGroup& group,
                               const Featurizer& featurizer);

/// Scores on the 1..5 rating scale used by every metric: raw output for
/// listwise/pairwise heads, 1 + 4 sigmoid(logit) for BCE heads.
std::vector<double> scale_scores(const ScorerParams& params, const ListGroup& group,
                                 const Featurizer& featurizer, LossType type);

/// CSV with header "epoch,mean_loss", epochs numbered from 1.
void write_loss_csv(std::ostream& out, const std::vector<double>& epoch_loss);

}  // namespace listalign
