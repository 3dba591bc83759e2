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

// JSON checkpoint container for a trained scorer. Doubles are written in
// shortest round-trip form, so save/load is bit-exact.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "listalign/scorer.h"
#include "listalign/trainer.h"

namespace listalign {

inline constexpr const char* kCheckpointFormat = "listalign-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ScorerParams params;
  std::size_t feature_dim = 0;
  TrainConfig config;
  std::string corpus_hash;
  double split_ratio = 0.9;
  std::uint64_t split_seed = 0;
};

nlohmann::ordered_json to_json(const Checkpoint& checkpoint);
/// Throws ParseError / ValidationError / DimensionError on a malformed file.
Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace listalign
