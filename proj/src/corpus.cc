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

#include "listalign/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "listalign/errors.h"
#include "listalign/hash.h"
#include "listalign/rng.h"

namespace listalign {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 11> kKnownFields = {
    "scenario_id", "image_id",  "image_ref",  "text",
    "ratings",     "modality_labels", "norm_label", "is_canary",
    "canary_gold", "latent_q",  "proposed_by"};

bool is_known_field(std::string_view key) {
  return std::find(kKnownFields.begin(), kKnownFields.end(), key) !=
         kKnownFields.end();
}

std::string require_string(const ojson& j, const char* field, bool required) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    if (required) throw ValidationError(field, std::string("missing field '") + field + "'");
    return {};
  }
  if (!it->is_string()) {
    throw ValidationError(field, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

int require_int(const ojson& value, const std::string& field) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e9) {
      return static_cast<int>(d);
    }
  }
  throw ValidationError(field, "field '" + field + "' must be an integer");
}

void check_score(int score, const std::string& field) {
  if (score < 1 || score > 5) {
    throw ValidationError(field, "field '" + field + "' = " + std::to_string(score) +
                                     " is outside 1..5");
  }
}

}  // namespace

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kText:
      return "text";
    case Modality::kImage:
      return "image";
    case Modality::kBoth:
      return "both";
  }
  return "text";
}

Modality parse_modality(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "text") return Modality::kText;
  if (lower == "image") return Modality::kImage;
  if (lower == "both") return Modality::kBoth;
  throw ValidationError("modality", "unknown modality '" + std::string(name) +
                                        "' (expected text|image|both)");
}

double ScenarioRecord::mean_rating() const {
  if (ratings.empty()) {
    throw ValidationError("ratings", "scenario '" + scenario_id + "' has no ratings");
  }
  double sum = 0.0;
  for (const auto& r : ratings) sum += r.score;
  return sum / static_cast<double>(ratings.size());
}

std::optional<Modality> ScenarioRecord::majority_modality() const {
  if (modality_labels.empty()) return std::nullopt;
  std::array<int, kNumModalities> counts{};
  for (const auto& l : modality_labels) ++counts[static_cast<int>(l.modality)];
  const int best = *std::max_element(counts.begin(), counts.end());
  int winners = 0;
  int winner = 0;
  for (int m = 0; m < kNumModalities; ++m) {
    if (counts[m] == best) {
      ++winners;
      winner = m;
    }
  }
  if (winners > 1) return Modality::kBoth;
  return static_cast<Modality>(winner);
}

void validate(const ScenarioRecord& r) {
  if (r.scenario_id.empty()) throw ValidationError("scenario_id", "scenario_id is empty");
  if (r.image_id.empty()) throw ValidationError("image_id", "image_id is empty");
  for (std::size_t i = 0; i < r.ratings.size(); ++i) {
    check_score(r.ratings[i].score, "ratings[" + std::to_string(i) + "].score");
  }
  if (r.modality_labels.size() > r.ratings.size()) {
    throw ValidationError("modality_labels",
                          "more modality labels than ratings on '" + r.scenario_id + "'");
  }
  if (r.norm_label && *r.norm_label != 1 && *r.norm_label != -1) {
    throw ValidationError("norm_label", "norm_label must be 1 or -1");
  }
  if (r.is_canary && !r.canary_gold) {
    throw ValidationError("canary_gold", "canary record '" + r.scenario_id +
                                             "' lacks canary_gold");
  }
  if (r.canary_gold) check_score(*r.canary_gold, "canary_gold");
  if (r.latent_q && !std::isfinite(*r.latent_q)) {
    throw ValidationError("latent_q", "latent_q must be finite");
  }
}

ScenarioRecord record_from_json(const ojson& j) {
  if (!j.is_object()) throw ValidationError("", "record must be a JSON object");
  ScenarioRecord r;
  r.scenario_id = require_string(j, "scenario_id", true);
  r.image_id = require_string(j, "image_id", true);
  r.image_ref = require_string(j, "image_ref", false);
  r.text = require_string(j, "text", true);

  if (auto it = j.find("ratings"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("ratings", "ratings must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& e = (*it)[i];
      const std::string field = "ratings[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("score")) {
        throw ValidationError(field, field + " must be {annotator_id, score}");
      }
      Rating rating;
      rating.annotator_id = require_string(e, "annotator_id", true);
      rating.score = require_int(e["score"], field + ".score");
      check_score(rating.score, field + ".score");
      r.ratings.push_back(std::move(rating));
    }
  }
  if (auto it = j.find("modality_labels"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw ValidationError("modality_labels", "modality_labels must be an array");
    }
    for (const auto& e : *it) {
      if (!e.is_object()) {
        throw ValidationError("modality_labels", "modality label must be an object");
      }
      ModalityLabel label;
      label.annotator_id = require_string(e, "annotator_id", true);
      label.modality = parse_modality(require_string(e, "modality", true));
      r.modality_labels.push_back(std::move(label));
    }
  }
  if (auto it = j.find("norm_label"); it != j.end() && !it->is_null()) {
    r.norm_label = require_int(*it, "norm_label");
  }
  if (auto it = j.find("is_canary"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ValidationError("is_canary", "is_canary must be a boolean");
    r.is_canary = it->get<bool>();
  }
  if (auto it = j.find("canary_gold"); it != j.end() && !it->is_null()) {
    r.canary_gold = require_int(*it, "canary_gold");
  }
  if (auto it = j.find("latent_q"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("latent_q", "latent_q must be a number");
    r.latent_q = it->get<double>();
  }
  if (auto it = j.find("proposed_by"); it != j.end() && !it->is_null()) {
    r.proposed_by = require_string(j, "proposed_by", true);
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!is_known_field(it.key())) r.extra[it.key()] = it.value();
  }
  validate(r);
  return r;
}

ojson record_to_json(const ScenarioRecord& r) {
  ojson j = ojson::object();
  j["scenario_id"] = r.scenario_id;
  j["image_id"] = r.image_id;
  j["image_ref"] = r.image_ref;
  j["text"] = r.text;
  ojson ratings = ojson::array();
  for (const auto& rating : r.ratings) {
    ratings.push_back({{"annotator_id", rating.annotator_id}, {"score", rating.score}});
  }
  j["ratings"] = std::move(ratings);
  ojson labels = ojson::array();
  for (const auto& label : r.modality_labels) {
    labels.push_back({{"annotator_id", label.annotator_id},
                      {"modality", std::string(modality_name(label.modality))}});
  }
  j["modality_labels"] = std::move(labels);
  if (r.norm_label) j["norm_label"] = *r.norm_label;
  j["is_canary"] = r.is_canary;
  if (r.canary_gold) j["canary_gold"] = *r.canary_gold;
  if (r.latent_q) j["latent_q"] = *r.latent_q;
  if (r.proposed_by) j["proposed_by"] = *r.proposed_by;
  for (auto it = r.extra.begin(); it != r.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::vector<ScenarioRecord> parse_corpus(std::istream& in) {
  std::vector<ScenarioRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), "line " + std::to_string(line_no) + ": " + e.what(),
                            line_no);
    }
  }
  return records;
}

std::vector<ScenarioRecord> parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

std::vector<ScenarioRecord> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<ScenarioRecord>& records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::string serialize_corpus(const std::vector<ScenarioRecord>& records) {
  std::ostringstream out;
  write_corpus(out, records);
  return out.str();
}

void save_corpus(const std::string& path, const std::vector<ScenarioRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file '" + path + "'");
  write_corpus(out, records);
}

std::vector<double> ListGroup::gold() const {
  std::vector<double> g;
  g.reserve(items.size());
  for (const auto& item : items) g.push_back(item.gold);
  return g;
}

std::vector<ListGroup> group_by_image(const std::vector<ScenarioRecord>& records,
                                      const GroupOptions& options) {
  std::map<std::string, std::vector<const ScenarioRecord*>> by_image;
  for (const auto& r : records) {
    if (r.is_canary && !options.include_canaries) continue;
    if (r.ratings.empty()) {
      throw ValidationError("ratings", "scenario '" + r.scenario_id +
                                           "' has no ratings and cannot be grouped");
    }
    by_image[r.image_id].push_back(&r);
  }

  std::vector<ListGroup> groups;
  groups.reserve(by_image.size());
  for (auto& [image_id, members] : by_image) {
    if (members.size() > options.max_list_size) {
      throw Error(ErrorCode::kState,
                  "image '" + image_id + "' has " + std::to_string(members.size()) +
                      " scenarios (cap " + std::to_string(options.max_list_size) +
                      "); group with a larger max_list_size and call truncate_lists first");
    }
    std::sort(members.begin(), members.end(),
              [](const ScenarioRecord* a, const ScenarioRecord* b) {
                return a->scenario_id < b->scenario_id;
              });
    ListGroup g;
    g.image_id = image_id;
    g.image_ref = members.front()->image_ref;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i > 0 && members[i]->scenario_id == members[i - 1]->scenario_id) {
        throw ValidationError("scenario_id",
                              "duplicate scenario_id '" + members[i]->scenario_id + "'");
      }
      const ScenarioRecord& r = *members[i];
      g.items.push_back({r.scenario_id, r.text, r.mean_rating(), r.majority_modality()});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

CorpusSplit split_corpus(const std::vector<ListGroup>& groups, double ratio,
                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ValidationError("ratio", "split ratio must lie in (0, 1)");
  }
  if (groups.empty()) throw ValidationError("groups", "cannot split an empty corpus");

  const std::size_t n = groups.size();
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  else n_train = 1;

  Rng rng(derive_seed(seed, "split"));
  const auto perm = rng.permutation(n);
  std::vector<bool> to_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) to_train[perm[i]] = true;

  CorpusSplit split;
  split.seed = seed;
  split.ratio = ratio;
  for (std::size_t i = 0; i < n; ++i) {
    (to_train[i] ? split.train : split.test).push_back(groups[i]);
  }
  if (split.test.empty()) {
    split.warning = "only one group available; the test split is empty";
  }
  return split;
}

std::vector<ListGroup> truncate_lists(const std::vector<ListGroup>& groups,
                                      std::size_t m, std::uint64_t seed) {
  if (m < 1) throw ValidationError("m", "list size must be at least 1");
  std::vector<ListGroup> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.size() <= m) {
      out.push_back(g);
      continue;
    }
    // Per-group stream: the chosen prefix grows with m for a fixed seed.
    Rng rng(derive_seed(seed, "truncate:" + g.image_id));
    auto perm = rng.permutation(g.size());
    perm.resize(m);
    std::sort(perm.begin(), perm.end());
    ListGroup t;
    t.image_id = g.image_id;
    t.image_ref = g.image_ref;
    for (std::size_t idx : perm) t.items.push_back(g.items[idx]);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ListGroup> subsample_fraction(const std::vector<ListGroup>& groups,
                                          double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction", "fraction must lie in (0, 1]");
  }
  const std::size_t n = groups.size();
  // The epsilon absorbs representation error such as 0.1 * 30 = 3.0000000000000004.
  const auto keep = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  if (keep == n) return groups;
  Rng rng(derive_seed(seed, "fraction"));
  auto perm = rng.permutation(n);
  perm.resize(keep);
  std::sort(perm.begin(), perm.end());
  std::vector<ListGroup> out;
  out.reserve(keep);
  for (std::size_t idx : perm) out.push_back(groups[idx]);
  return out;
}

std::string corpus_hash(const std::vector<ScenarioRecord>& records) {
  return to_hex(fnv1a64(serialize_corpus(records)));
}

}  // namespace listalign
