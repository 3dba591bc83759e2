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

#include "listalign/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "listalign/errors.h"
#include "listalign/featurizer.h"
#include "listalign/rng.h"

namespace listalign {

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

int clamp_rating(double x) {
  return static_cast<int>(std::clamp<long>(std::lround(x), 1, 5));
}

}  // namespace

void validate(const SynthConfig& c) {
  auto fail = [](const char* field, const std::string& msg) {
    throw ValidationError(field, std::string(field) + ": " + msg);
  };
  if (c.n_groups == 0) fail("n_groups", "must be positive");
  if (c.list_min < 1 || c.list_max > kMaxListSize || c.list_min > c.list_max) {
    fail("list_size_range", "need 1 <= min <= max <= 5");
  }
  if (c.feature_dim == 0) fail("feature_dim", "must be positive");
  if (!(c.noise_std >= 0.0) || !std::isfinite(c.noise_std)) fail("noise_std", "must be >= 0");
  if (c.annotators_per_item == 0) fail("annotators_per_item", "must be positive");
  if (c.annotator_pool < c.annotators_per_item) {
    fail("annotator_pool", "must be at least annotators_per_item");
  }
  if (c.action_vocab < c.action_tokens || c.action_tokens == 0) {
    fail("action_vocab", "need action_vocab >= action_tokens >= 1");
  }
  if (c.harm_vocab == 0) fail("harm_vocab", "must be positive");
  if (c.context_vocab == 0 && c.context_tokens > 0) fail("context_vocab", "must be positive");
  for (double p : {c.harm_prob, c.both_prob, c.image_only_prob, c.label_accuracy,
                   c.canary_fraction}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probability", "probabilities must lie in [0, 1]");
  }
  if (c.both_prob + c.image_only_prob > 1.0) {
    fail("both_prob", "both_prob + image_only_prob must not exceed 1");
  }
  if (c.action_scale < 0.0 || c.harm_weight < 0.0 || c.image_scale < 0.0 ||
      !(c.annotator_bias_std >= 0.0) || !(c.scene_std >= 0.0)) {
    fail("scale", "weight scales must be non-negative");
  }
}

SynthCorpus generate_synthetic(const SynthConfig& c) {
  validate(c);

  Rng wrng(derive_seed(c.seed, "synth-weights"));
  std::vector<double> action_w(c.action_vocab);
  for (double& w : action_w) w = wrng.uniform(-c.action_scale, c.action_scale);
  std::vector<double> harm_w(c.harm_vocab);
  for (double& w : harm_w) w = -c.harm_weight * wrng.uniform(1.0, 1.25);
  std::vector<double> image_dir(c.feature_dim);
  double norm = 0.0;
  for (double& u : image_dir) {
    u = wrng.normal();
    norm += u * u;
  }
  norm = std::sqrt(norm);
  for (double& u : image_dir) u /= norm;
  const double offset_scale = c.image_scale * std::sqrt(static_cast<double>(c.feature_dim));

  std::vector<std::string> annotators;
  std::vector<double> severity(c.annotator_pool, 0.0);
  Rng severity_rng(derive_seed(c.seed, "severity"));
  for (std::size_t a = 0; a < c.annotator_pool; ++a) {
    annotators.push_back(numbered("ann", a, 3));
    if (c.annotator_bias_std > 0.0) severity[a] = c.annotator_bias_std * severity_rng.normal();
  }

  Rng rng(derive_seed(c.seed, "synth"));
  Rng scene_rng(derive_seed(c.seed, "scene"));
  SynthCorpus out;
  std::size_t scenario_counter = 0;
  for (std::size_t g = 0; g < c.n_groups; ++g) {
    const std::string image_id = numbered("img", g, 5);
    const auto stub = stub_image_vector(image_id, c.feature_dim);
    double proj = 0.0;
    for (std::size_t i = 0; i < c.feature_dim; ++i) proj += image_dir[i] * stub[i];
    const double image_offset = offset_scale * proj;
    const double scene = c.scene_std > 0.0 ? c.scene_std * scene_rng.normal() : 0.0;

    const std::size_t n =
        c.list_min + static_cast<std::size_t>(rng.below(c.list_max - c.list_min + 1));
    std::vector<std::size_t> panel;
    if (c.panel_per_list) panel = rng.permutation(annotators.size());
    for (std::size_t k = 0; k < n; ++k) {
      ScenarioRecord r;
      r.scenario_id = numbered("s", scenario_counter++, 6);
      r.image_id = image_id;
      r.image_ref = "synthetic://images/" + image_id + ".png";

      const double u = rng.uniform();
      Modality truth = Modality::kText;
      double sens = 0.0;
      if (u < c.image_only_prob) {
        truth = Modality::kImage;
        sens = 1.5;
      } else if (u < c.image_only_prob + c.both_prob) {
        truth = Modality::kBoth;
        sens = 1.0;
      }

      std::vector<std::string> tokens;
      double q_text = c.base_quality;
      const std::size_t n_action =
          truth == Modality::kImage ? std::max<std::size_t>(1, c.action_tokens - 1)
                                    : c.action_tokens;
      std::vector<std::size_t> picks = rng.permutation(c.action_vocab);
      for (std::size_t t = 0; t < n_action; ++t) {
        tokens.push_back(numbered("a", picks[t], 2));
        q_text += action_w[picks[t]];
      }
      if (rng.bernoulli(c.harm_prob)) {
        const auto h = static_cast<std::size_t>(rng.below(c.harm_vocab));
        tokens.push_back(numbered("h", h, 2));
        q_text += harm_w[h];
      }
      if (truth == Modality::kImage) tokens.push_back("something");
      if (truth == Modality::kBoth) tokens.push_back("here");
      for (std::size_t t = 0; t < c.context_tokens; ++t) {
        tokens.push_back(numbered("c", static_cast<std::size_t>(rng.below(c.context_vocab)), 2));
      }
      rng.shuffle(tokens);
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (t > 0) r.text.push_back(' ');
        r.text += tokens[t];
      }

      const double q = q_text + sens * image_offset + scene;
      r.latent_q = q;
      r.norm_label = q_text >= 3.0 ? 1 : -1;

      const auto order = c.panel_per_list ? panel : rng.permutation(annotators.size());
      for (std::size_t a = 0; a < c.annotators_per_item; ++a) {
        const std::string& who = annotators[order[a]];
        const double noise = c.noise_std > 0.0 ? c.noise_std * rng.normal() : 0.0;
        r.ratings.push_back({who, clamp_rating(q + severity[order[a]] + noise)});
        Modality reported = truth;
        if (!rng.bernoulli(c.label_accuracy)) {
          const int shift = 1 + static_cast<int>(rng.below(2));
          reported = static_cast<Modality>((static_cast<int>(truth) + shift) % kNumModalities);
        }
        r.modality_labels.push_back({who, reported});
      }
      if (c.canary_fraction > 0.0 && rng.bernoulli(c.canary_fraction)) {
        r.is_canary = true;
        r.canary_gold = clamp_rating(q);
      }
      out.latent.push_back(q);
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace listalign
