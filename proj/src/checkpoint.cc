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

#include "listalign/checkpoint.h"

#include <fstream>
#include <span>

#include "listalign/errors.h"

namespace listalign {

namespace {

void read_array(const nlohmann::ordered_json& j, const char* key, std::span<double> out) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != out.size()) {
    throw DimensionError(std::string("checkpoint array '") + key + "' has " +
                         std::to_string(arr.is_array() ? arr.size() : 0) +
                         " values, expected " + std::to_string(out.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = arr[i].get<double>();
}

}  // namespace

nlohmann::ordered_json to_json(const Checkpoint& c) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["input_dim"] = c.params.input_dim();
  j["hidden"] = c.params.hidden();
  j["feature_dim"] = c.feature_dim;
  j["train_config"] = to_json(c.config);
  j["corpus_hash"] = c.corpus_hash;
  j["split"] = {{"ratio", c.split_ratio}, {"seed", c.split_seed}};
  const auto& p = c.params;
  auto arr = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  j["params"] = {{"w1", arr(p.w1())},       {"b1", arr(p.b1())},
                 {"w2", arr(p.w2())},       {"b2", p.b2()},
                 {"mod_w", arr(p.mod_w())}, {"mod_b", arr(p.mod_b())}};
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw ValidationError("format", "not a listalign checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("version",
                            "unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    const auto input_dim = j.at("input_dim").get<std::size_t>();
    const auto hidden = j.at("hidden").get<std::size_t>();
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    if (input_dim != 2 * c.feature_dim) {
      throw DimensionError("checkpoint input_dim must be twice feature_dim");
    }
    c.config = train_config_from_json(j.at("train_config"));
    if (c.config.hidden != hidden) {
      throw DimensionError("checkpoint hidden width disagrees with its train_config");
    }
    c.corpus_hash = j.at("corpus_hash").get<std::string>();
    c.split_ratio = j.at("split").at("ratio").get<double>();
    c.split_seed = j.at("split").at("seed").get<std::uint64_t>();
    c.params = ScorerParams(input_dim, hidden);
    const auto& p = j.at("params");
    read_array(p, "w1", c.params.w1());
    read_array(p, "b1", c.params.b1());
    read_array(p, "w2", c.params.w2());
    c.params.b2() = p.at("b2").get<double>();
    read_array(p, "mod_w", c.params.mod_w());
    read_array(p, "mod_b", c.params.mod_b());
    if (!c.params.all_finite()) throw ValidationError("params", "non-finite parameter");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint", std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path);
  out << to_json(checkpoint).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace listalign
