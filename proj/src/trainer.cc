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

#include "listalign/trainer.h"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "listalign/errors.h"
#include "listalign/rng.h"

namespace listalign {

double TrainConfig::effective_mse_weight() const {
  if (aux_mse_weight) return *aux_mse_weight;
  return loss == LossType::kListMle ? 0.1 : 0.0;
}

AdamWHyper TrainConfig::adamw() const {
  return {lr, beta1, beta2, adam_eps, weight_decay};
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr", "lr must be positive");
  if (epochs < 1) throw ValidationError("epochs", "epochs must be at least 1");
  if (list_size < 1 || list_size > kMaxListSize) {
    throw ValidationError("list_size", "list size must lie in 1..5");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction", "fraction must lie in (0, 1]");
  }
  if (effective_mse_weight() < 0.0) {
    throw ValidationError("aux_mse_weight", "aux_mse_weight must be >= 0");
  }
  if (modality_weight < 0.0) {
    throw ValidationError("modality_weight", "modality_weight must be >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("beta", "AdamW betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps", "adam_eps must be positive");
  if (weight_decay < 0.0) throw ValidationError("weight_decay", "weight_decay must be >= 0");
  if (hidden == 0) throw ValidationError("hidden", "hidden width must be positive");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["loss"] = std::string(loss_name(c.loss));
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["list_size"] = c.list_size;
  j["fraction"] = c.fraction;
  j["aux_mse_weight"] = c.effective_mse_weight();
  j["modality_weight"] = c.modality_weight;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["weight_decay"] = c.weight_decay;
  j["hidden"] = c.hidden;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::ordered_json& j) {
  TrainConfig c;
  c.loss = parse_loss_type(j.at("loss").get<std::string>());
  c.lr = j.at("lr").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.list_size = j.at("list_size").get<std::size_t>();
  c.fraction = j.at("fraction").get<double>();
  c.aux_mse_weight = j.at("aux_mse_weight").get<double>();
  c.modality_weight = j.at("modality_weight").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

TrainResult train(const TrainConfig& config, const std::vector<ListGroup>& train_groups,
                  const Featurizer& featurizer) {
  config.validate();
  if (train_groups.empty()) throw ValidationError("train_groups", "training set is empty");

  const auto groups = truncate_lists(
      subsample_fraction(train_groups, config.fraction, config.seed), config.list_size,
      config.seed);

  // Features are fixed during training; compute once.
  std::vector<std::vector<std::vector<double>>> features(groups.size());
  double gold_sum = 0.0;
  std::size_t gold_count = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& item : groups[g].items) {
      features[g].push_back(featurizer.features(groups[g], item));
      gold_sum += item.gold;
      ++gold_count;
    }
  }

  // Scale-valued heads start at the mean training rating; BCE logits at 0.
  const double bias = config.loss == LossType::kBce ? 0.0 : gold_sum / gold_count;
  TrainResult result;
  result.params = ScorerParams::initialize(featurizer.input_dim(), config.hidden,
                                           config.seed, bias);
  ScorerParams grad(featurizer.input_dim(), config.hidden);
  AdamWState state;
  const AdamWHyper hyper = config.adamw();
  const double mse_w = config.effective_mse_weight();

  Rng order_rng(derive_seed(config.seed, "epoch-order"));
  std::vector<std::vector<double>> activations;
  std::vector<double> scores;
  std::vector<double> dscore;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = order_rng.permutation(groups.size());
    double total = 0.0;
    std::size_t stepped = 0;
    std::size_t skipped = 0;
    for (std::size_t g : order) {
      const ListGroup& group = groups[g];
      const std::size_t n = group.size();
      const auto gold = group.gold();
      activations.resize(n);
      scores.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = score(result.params, features[g][i], activations[i]);
      }

      const LossResult main = main_loss(config.loss, scores, gold);
      bool has_signal = !main.skipped;
      double loss = main.value;
      dscore.assign(n, 0.0);
      if (!main.skipped) dscore = main.grad;

      if (mse_w > 0.0) {
        has_signal = true;
        if (config.loss == LossType::kBce) {
          // Auxiliary regression acts on the rating-scale score 1 + 4 sigmoid(s).
          std::vector<double> mapped(n);
          for (std::size_t i = 0; i < n; ++i) mapped[i] = bce_to_scale(scores[i]);
          const LossResult aux = mse_aux_loss<double>(mapped, gold);
          loss += mse_w * aux.value;
          for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(scores[i]);
            dscore[i] += mse_w * aux.grad[i] * 4.0 * p * (1.0 - p);
          }
        } else {
          const LossResult aux = mse_aux_loss<double>(scores, gold);
          loss += mse_w * aux.value;
          for (std::size_t i = 0; i < n; ++i) dscore[i] += mse_w * aux.grad[i];
        }
      }
      if (!has_signal) {
        ++skipped;
        continue;
      }

      grad.set_zero();
      for (std::size_t i = 0; i < n; ++i) {
        backprop_score(result.params, features[g][i], activations[i], dscore[i], grad);
      }

      if (config.modality_weight > 0.0) {
        std::size_t labeled = 0;
        for (const auto& item : group.items) labeled += item.modality.has_value();
        for (std::size_t i = 0; i < n && labeled > 0; ++i) {
          if (!group.items[i].modality) continue;
          const auto logits = modality_logits(result.params, features[g][i]);
          const LossResult ml =
              modality_loss<double>(logits, *group.items[i].modality);
          const double w = config.modality_weight / static_cast<double>(labeled);
          loss += w * ml.value;
          std::array<double, 3> dl{};
          for (std::size_t k = 0; k < 3; ++k) dl[k] = w * ml.grad[k];
          backprop_modality(features[g][i], dl, grad);
        }
      }

      adamw_step(result.params.flat(), grad.flat(), state, hyper);
      total += loss;
      ++stepped;
    }
    result.steps += stepped;
    result.skipped_groups = skipped;
    if (stepped == 0) {
      throw Error(ErrorCode::kState,
                  "no optimizer steps: all " + std::to_string(groups.size()) +
                      " training groups were skipped (loss '" +
                      std::string(loss_name(config.loss)) +
                      "' found no signal; BPO needs a strictly ordered gold pair, "
                      "ListMLE needs lists of 2+ or an auxiliary MSE weight)");
    }
    result.epoch_loss.push_back(total / static_cast<double>(stepped));
  }
  if (!result.params.all_finite()) {
    throw Error(ErrorCode::kState, "training diverged: non-finite parameters");
  }
  return result;
}

std::vector<double> raw_scores(const ScorerParams& params, const ListGroup& group,
                               const Featurizer& featurizer) {
  std::vector<double> out;
  out.reserve(group.size());
  for (const auto& item : group.items) {
    out.push_back(score(params, featurizer.features(group, item)));
  }
  return out;
}

std::vector<double> scale_scores(const ScorerParams& params, const ListGroup& group,
                                 const Featurizer& featurizer, LossType type) {
  auto out = raw_scores(params, group, featurizer);
  if (type == LossType::kBce) {
    for (double& s : out) s = bce_to_scale(s);
  }
  return out;
}

void write_loss_csv(std::ostream& out, const std::vector<double>& epoch_loss) {
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", epoch_loss[e]);
    out << (e + 1) << ',' << buf << '\n';
  }
}

}  // namespace listalign
