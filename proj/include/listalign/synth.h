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
#include <vector>

#include "listalign/corpus.h"

namespace listalign {

/// Latent-quality corpus generator. Each scenario text is a short sequence of
/// vocabulary tokens; its latent quality is linear in the tokens it contains:
///
///   q = base + sum(action weights) + harm weight (if any) + sens * image_offset
///
/// Action ("a##") tokens carry small weights of either sign and order
/// scenarios among themselves; harm ("h##") tokens carry large negative
/// weights and decide most safe/unsafe outcomes. Context ("c##") tokens carry
/// no weight. A scenario with the marker "here" is image-sensitive (sens 1,
/// modality both); the marker "something" replaces one action token and has
/// sens 1.5 (modality image). The image offset is a fixed linear function of
/// the image's stub feature vector, so it is learnable from the featurizer.
struct SynthConfig {
  std::size_t n_groups = 2000;
  std::size_t list_min = 2;
  std::size_t list_max = 5;
  std::size_t feature_dim = 256;
  double noise_std = 0.5;
  std::uint64_t seed = 1;

  std::size_t annotators_per_item = 3;
  std::size_t annotator_pool = 30;

  double base_quality = 4.0;
  std::size_t action_vocab = 24;
  std::size_t harm_vocab = 8;
  std::size_t context_vocab = 16;
  std::size_t action_tokens = 3;
  std::size_t context_tokens = 2;
  double action_scale = 0.7;   // action weights ~ U(-s, s)
  double harm_prob = 0.15;
  double harm_weight = 3.5;    // harm weights ~ -w * U(1, 1.25)
  double image_scale = 0.3;    // std of the per-image offset
  double both_prob = 0.3;
  double image_only_prob = 0.15;
  double label_accuracy = 0.8;  // annotator reports the true modality
  double canary_fraction = 0.0;
  double annotator_bias_std = 0.0;  // per-annotator severity ~ N(0, s^2)
  bool panel_per_list = true;       // one rater panel annotates a whole list
  double scene_std = 0.0;           // unobserved per-image shift of every item
};

/// Throws ValidationError naming the offending field.
void validate(const SynthConfig& config);

struct SynthCorpus {
  std::vector<ScenarioRecord> records;
  std::vector<double> latent;  // aligned with records
};

SynthCorpus generate_synthetic(const SynthConfig& config);

}  // namespace listalign
