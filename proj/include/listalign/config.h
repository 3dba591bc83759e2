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

// TOML-style configuration: "[section]" headers, "key = value" lines, "#"
// comments. Values are quoted strings, numbers, true/false, or flat arrays
// "[a, b]". Keys are addressed as "section.key"; keys before any header live
// in the unnamed section and are addressed by bare name.
//
// Environment overrides: MORALE_<SECTION>_<KEY> (upper case) replaces
// section.key, e.g. MORALE_SERVICE_DELTA=0.5 sets service.delta.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "listalign/synth.h"
#include "listalign/trainer.h"

namespace listalign {

inline constexpr const char* kEnvPrefix = "MORALE_";

class Config {
 public:
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  static Config parse(std::istream& in);
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  /// Replaces every known key for which the lookup returns a value, and adds
  /// the extra keys the same way.
  void apply_env(const EnvLookup& lookup, const std::vector<std::string>& extra_keys = {});
  /// apply_env over the process environment.
  void apply_process_env(const std::vector<std::string>& extra_keys = {});

  static std::string env_name(const std::string& key);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string raw) { values_[key] = std::move(raw); }
  std::vector<std::string> keys() const;
  /// Keys of one section, without the section prefix.
  std::vector<std::string> section_keys(const std::string& section) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;

  /// Flat {"section.key": value} object; values that parse as JSON numbers
  /// or booleans are emitted as such, everything else as strings.
  nlohmann::ordered_json to_json() const;
  static Config from_json(const nlohmann::ordered_json& flat);
  /// Copies every key of other over this one.
  void merge(const Config& other);

 private:
  std::map<std::string, std::string> values_;  // raw value text, quotes stripped
};

/// Throws ValidationError naming an unknown key of the section.
void reject_unknown_keys(const Config& config, const std::string& section,
                         const std::vector<std::string>& known);

/// Overlays [synth] keys on the defaults; validates the result.
SynthConfig synth_config_from(const Config& config, SynthConfig base = {});
/// Overlays [train] keys on the defaults; validates the result.
TrainConfig train_config_from(const Config& config, TrainConfig base = {});

struct DataConfig {
  std::string corpus;
  std::string image_features;  // optional JSONL sidecar
  std::size_t feature_dim = 256;
  double split_ratio = 0.9;
  std::uint64_t split_seed = 13;
};

DataConfig data_config_from(const Config& config, DataConfig base = {});

/// Fully resolved values in config-key form, for manifests.
Config to_config(const SynthConfig& synth);
Config to_config(const TrainConfig& train);
Config to_config(const DataConfig& data);

}  // namespace listalign
