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

#include "listalign/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "listalign/errors.h"
#include "listalign/losses.h"

namespace listalign {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

// Parses a quoted string starting at s[0] == '"'; returns the unescaped text
// and the index just past the closing quote.
std::pair<std::string, std::size_t> parse_quoted(std::string_view s, std::size_t line) {
  std::string out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"') return {out, i + 1};
    if (c == '\\' && i + 1 < s.size()) {
      char n = s[++i];
      switch (n) {
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        case '"':
        case '\\':
          out += n;
          break;
        default:
          throw ParseError(line, std::string("unknown escape \\") + n);
      }
      continue;
    }
    out += c;
  }
  throw ParseError(line, "unterminated string");
}

std::string strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && quoted) {
      ++i;
    } else if (s[i] == '"') {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return std::string(s.substr(0, i));
    }
  }
  return std::string(s);
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

ValidationError bad_value(const std::string& key, const std::string& raw, const char* what) {
  return ValidationError(key, "config key '" + key + "' = '" + raw + "' is not " + what);
}

const std::vector<std::string>& schema_keys() {
  static const std::vector<std::string> keys = {
      "synth.n_groups",         "synth.list_min",         "synth.list_max",
      "synth.feature_dim",      "synth.noise_std",        "synth.seed",
      "synth.annotators_per_item", "synth.annotator_pool", "synth.base_quality",
      "synth.action_vocab",     "synth.harm_vocab",       "synth.context_vocab",
      "synth.action_tokens",    "synth.context_tokens",   "synth.action_scale",
      "synth.harm_prob",        "synth.harm_weight",      "synth.image_scale",
      "synth.both_prob",        "synth.image_only_prob",  "synth.label_accuracy",
      "synth.canary_fraction",  "synth.annotator_bias_std", "synth.panel_per_list",
      "synth.scene_std",        "train.loss",             "train.lr",
      "train.epochs",           "train.list_size",        "train.fraction",
      "train.aux_mse_weight",   "train.modality_weight",  "train.beta1",
      "train.beta2",            "train.adam_eps",         "train.weight_decay",
      "train.hidden",           "train.seed",             "data.corpus",
      "data.image_features",    "data.feature_dim",       "data.split_ratio",
      "data.split_seed",        "service.corpus",         "service.checkpoint",
      "service.delta",          "service.delta_inclusive", "service.canary_period",
      "service.bind",           "service.port",           "service.event_log",
      "service.snapshot",       "service.seed",           "ablate.axis",
      "ablate.values",          "ablate.seeds",
  };
  return keys;
}

}  // namespace

Config Config::parse(std::istream& in) {
  Config c;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_key(section)) throw ParseError(line_no, "invalid section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) throw ParseError(line_no, "invalid key '" + key + "'");
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");
    if (value.front() == '"') {
      auto [text, end] = parse_quoted(value, line_no);
      if (!trim(std::string_view(value).substr(end)).empty()) {
        throw ParseError(line_no, "trailing characters after string");
      }
      value = text;
    } else if (value.front() == '[' && value.back() != ']') {
      throw ParseError(line_no, "unterminated array");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.values_.count(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
    c.values_[full] = value;
  }
  return c;
}

Config Config::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  return parse(in);
}

std::string Config::env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) {
    out += (c == '.' || c == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

void Config::apply_env(const EnvLookup& lookup, const std::vector<std::string>& extra_keys) {
  std::vector<std::string> targets = keys();
  targets.insert(targets.end(), extra_keys.begin(), extra_keys.end());
  for (const auto& key : targets) {
    if (auto v = lookup(env_name(key))) values_[key] = *v;
  }
}

void Config::apply_process_env(const std::vector<std::string>& extra_keys) {
  std::vector<std::string> all = schema_keys();
  all.insert(all.end(), extra_keys.begin(), extra_keys.end());
  apply_env(
      [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
      },
      all);
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::vector<std::string> Config::section_keys(const std::string& section) const {
  std::vector<std::string> out;
  const std::string prefix = section + ".";
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
  }
  return out;
}

std::optional<std::string> Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Config::get_double(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  auto v = to_double(*s);
  if (!v) throw bad_value(key, *s, "a number");
  return v;
}

std::optional<std::int64_t> Config::get_int(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  std::int64_t v = 0;
  const char* end = s->data() + s->size();
  auto [ptr, ec] = std::from_chars(s->data(), end, v);
  if (ec != std::errc() || ptr != end) throw bad_value(key, *s, "an integer");
  return v;
}

std::optional<std::uint64_t> Config::get_uint(const std::string& key) const {
  auto v = get_int(key);
  if (!v) return std::nullopt;
  if (*v < 0) throw bad_value(key, std::to_string(*v), "a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

std::optional<bool> Config::get_bool(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1") return true;
  if (*s == "false" || *s == "0") return false;
  throw bad_value(key, *s, "true or false");
}

std::optional<std::vector<double>> Config::get_doubles(const std::string& key) const {
  auto s = get_string(key);
  if (!s) return std::nullopt;
  std::string body = *s;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw bad_value(key, *s, "an array");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto v = to_double(item);
    if (!v) throw bad_value(key, *s, "a list of numbers");
    out.push_back(*v);
  }
  return out;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  return get_double(key).value_or(fallback);
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values_) {
    const auto parsed = nlohmann::ordered_json::parse(v, nullptr, false);
    j[k] = parsed.is_number() || parsed.is_boolean() ? parsed : nlohmann::ordered_json(v);
  }
  return j;
}

Config Config::from_json(const nlohmann::ordered_json& flat) {
  Config c;
  for (const auto& [k, v] : flat.items()) {
    c.values_[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return c;
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

namespace {

std::string num(double v) { return nlohmann::ordered_json(v).dump(); }
std::string num(std::uint64_t v) { return std::to_string(v); }

}  // namespace

Config to_config(const SynthConfig& s) {
  Config c;
  c.set("synth.n_groups", num(std::uint64_t{s.n_groups}));
  c.set("synth.list_min", num(std::uint64_t{s.list_min}));
  c.set("synth.list_max", num(std::uint64_t{s.list_max}));
  c.set("synth.feature_dim", num(std::uint64_t{s.feature_dim}));
  c.set("synth.noise_std", num(s.noise_std));
  c.set("synth.seed", num(s.seed));
  c.set("synth.annotators_per_item", num(std::uint64_t{s.annotators_per_item}));
  c.set("synth.annotator_pool", num(std::uint64_t{s.annotator_pool}));
  c.set("synth.base_quality", num(s.base_quality));
  c.set("synth.action_vocab", num(std::uint64_t{s.action_vocab}));
  c.set("synth.harm_vocab", num(std::uint64_t{s.harm_vocab}));
  c.set("synth.context_vocab", num(std::uint64_t{s.context_vocab}));
  c.set("synth.action_tokens", num(std::uint64_t{s.action_tokens}));
  c.set("synth.context_tokens", num(std::uint64_t{s.context_tokens}));
  c.set("synth.action_scale", num(s.action_scale));
  c.set("synth.harm_prob", num(s.harm_prob));
  c.set("synth.harm_weight", num(s.harm_weight));
  c.set("synth.image_scale", num(s.image_scale));
  c.set("synth.both_prob", num(s.both_prob));
  c.set("synth.image_only_prob", num(s.image_only_prob));
  c.set("synth.label_accuracy", num(s.label_accuracy));
  c.set("synth.canary_fraction", num(s.canary_fraction));
  c.set("synth.annotator_bias_std", num(s.annotator_bias_std));
  c.set("synth.panel_per_list", s.panel_per_list ? "true" : "false");
  c.set("synth.scene_std", num(s.scene_std));
  return c;
}

Config to_config(const TrainConfig& t) {
  Config c;
  const auto j = listalign::to_json(t);
  for (const auto& [k, v] : j.items()) {
    c.set("train." + k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return c;
}

Config to_config(const DataConfig& d) {
  Config c;
  c.set("data.corpus", d.corpus);
  c.set("data.image_features", d.image_features);
  c.set("data.feature_dim", num(std::uint64_t{d.feature_dim}));
  c.set("data.split_ratio", num(d.split_ratio));
  c.set("data.split_seed", num(d.split_seed));
  return c;
}

void reject_unknown_keys(const Config& config, const std::string& section,
                         const std::vector<std::string>& known) {
  for (const auto& k : config.section_keys(section)) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ValidationError(section + "." + k, "unknown config key '" + section + "." + k + "'");
    }
  }
}

namespace {

template <class T>
void overlay_size(const Config& c, const std::string& key, T& field) {
  if (auto v = c.get_uint(key)) field = static_cast<T>(*v);
}

void overlay_double(const Config& c, const std::string& key, double& field) {
  if (auto v = c.get_double(key)) field = *v;
}

std::vector<std::string> section_schema(const std::string& section) {
  std::vector<std::string> out;
  const std::string prefix = section + ".";
  for (const auto& k : schema_keys()) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k.substr(prefix.size()));
  }
  return out;
}

}  // namespace

SynthConfig synth_config_from(const Config& c, SynthConfig s) {
  reject_unknown_keys(c, "synth", section_schema("synth"));
  overlay_size(c, "synth.n_groups", s.n_groups);
  overlay_size(c, "synth.list_min", s.list_min);
  overlay_size(c, "synth.list_max", s.list_max);
  overlay_size(c, "synth.feature_dim", s.feature_dim);
  overlay_double(c, "synth.noise_std", s.noise_std);
  overlay_size(c, "synth.seed", s.seed);
  overlay_size(c, "synth.annotators_per_item", s.annotators_per_item);
  overlay_size(c, "synth.annotator_pool", s.annotator_pool);
  overlay_double(c, "synth.base_quality", s.base_quality);
  overlay_size(c, "synth.action_vocab", s.action_vocab);
  overlay_size(c, "synth.harm_vocab", s.harm_vocab);
  overlay_size(c, "synth.context_vocab", s.context_vocab);
  overlay_size(c, "synth.action_tokens", s.action_tokens);
  overlay_size(c, "synth.context_tokens", s.context_tokens);
  overlay_double(c, "synth.action_scale", s.action_scale);
  overlay_double(c, "synth.harm_prob", s.harm_prob);
  overlay_double(c, "synth.harm_weight", s.harm_weight);
  overlay_double(c, "synth.image_scale", s.image_scale);
  overlay_double(c, "synth.both_prob", s.both_prob);
  overlay_double(c, "synth.image_only_prob", s.image_only_prob);
  overlay_double(c, "synth.label_accuracy", s.label_accuracy);
  overlay_double(c, "synth.canary_fraction", s.canary_fraction);
  overlay_double(c, "synth.annotator_bias_std", s.annotator_bias_std);
  if (auto v = c.get_bool("synth.panel_per_list")) s.panel_per_list = *v;
  overlay_double(c, "synth.scene_std", s.scene_std);
  validate(s);
  return s;
}

TrainConfig train_config_from(const Config& c, TrainConfig t) {
  reject_unknown_keys(c, "train", section_schema("train"));
  if (auto v = c.get_string("train.loss")) t.loss = parse_loss_type(*v);
  overlay_double(c, "train.lr", t.lr);
  if (auto v = c.get_int("train.epochs")) t.epochs = static_cast<int>(*v);
  overlay_size(c, "train.list_size", t.list_size);
  overlay_double(c, "train.fraction", t.fraction);
  if (auto v = c.get_double("train.aux_mse_weight")) t.aux_mse_weight = *v;
  overlay_double(c, "train.modality_weight", t.modality_weight);
  overlay_double(c, "train.beta1", t.beta1);
  overlay_double(c, "train.beta2", t.beta2);
  overlay_double(c, "train.adam_eps", t.adam_eps);
  overlay_double(c, "train.weight_decay", t.weight_decay);
  overlay_size(c, "train.hidden", t.hidden);
  overlay_size(c, "train.seed", t.seed);
  t.validate();
  return t;
}

DataConfig data_config_from(const Config& c, DataConfig d) {
  reject_unknown_keys(c, "data", section_schema("data"));
  d.corpus = c.get_string("data.corpus", d.corpus);
  d.image_features = c.get_string("data.image_features", d.image_features);
  overlay_size(c, "data.feature_dim", d.feature_dim);
  overlay_double(c, "data.split_ratio", d.split_ratio);
  overlay_size(c, "data.split_seed", d.split_seed);
  if (d.feature_dim == 0) throw ValidationError("data.feature_dim", "feature_dim must be positive");
  if (!(d.split_ratio > 0.0 && d.split_ratio < 1.0)) {
    throw ValidationError("data.split_ratio", "split_ratio must lie in (0, 1)");
  }
  return d;
}

}  // namespace listalign
