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

// Corpus schema, JSONL ingestion, image-level grouping, splitting and the
// subsetting used by the list-size / data-fraction ablations.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace listalign {

enum class Modality { kText = 0, kImage = 1, kBoth = 2 };

inline constexpr int kNumModalities = 3;

std::string_view modality_name(Modality m);
/// Accepts "text" | "image" | "both" (case-insensitive); throws ValidationError.
Modality parse_modality(std::string_view name);

struct Rating {
  std::string annotator_id;
  int score = 0;  // 1..5

  bool operator==(const Rating&) const = default;
};

struct ModalityLabel {
  std::string annotator_id;
  Modality modality = Modality::kText;

  bool operator==(const ModalityLabel&) const = default;
};

struct ScenarioRecord {
  std::string scenario_id;
  std::string image_id;
  std::string image_ref;  // pass-through, never fetched
  std::string text;
  std::vector<Rating> ratings;
  std::vector<ModalityLabel> modality_labels;
  std::optional<int> norm_label;  // +1 / -1
  bool is_canary = false;
  std::optional<int> canary_gold;
  std::optional<double> latent_q;           // synthetic corpora only
  std::optional<std::string> proposed_by;   // scenarios added by annotators
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  /// Arithmetic mean of the ratings; throws if there are none.
  double mean_rating() const;

  /// Majority of modality labels, ties resolved to BOTH; empty if unlabeled.
  std::optional<Modality> majority_modality() const;

  bool operator==(const ScenarioRecord&) const = default;
};

/// Checks the record invariants; throws ValidationError naming the field.
void validate(const ScenarioRecord& record);

ScenarioRecord record_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json record_to_json(const ScenarioRecord& record);

/// One record per non-blank line. Errors carry the 1-based line number.
std::vector<ScenarioRecord> parse_corpus(std::istream& in);
std::vector<ScenarioRecord> parse_corpus(std::string_view text);
std::vector<ScenarioRecord> load_corpus(const std::string& path);

void write_corpus(std::ostream& out, const std::vector<ScenarioRecord>& records);
std::string serialize_corpus(const std::vector<ScenarioRecord>& records);
void save_corpus(const std::string& path, const std::vector<ScenarioRecord>& records);

struct ListItem {
  std::string scenario_id;
  std::string text;
  double gold = 0.0;  // consensus rating in [1, 5]
  std::optional<Modality> modality;

  bool operator==(const ListItem&) const = default;
};

/// Scenarios sharing one image context, in ascending scenario_id order.
struct ListGroup {
  std::string image_id;
  std::string image_ref;
  std::vector<ListItem> items;

  std::size_t size() const { return items.size(); }
  std::vector<double> gold() const;

  bool operator==(const ListGroup&) const = default;
};

inline constexpr std::size_t kMaxListSize = 5;

enum class Aggregation { kMean };

struct GroupOptions {
  Aggregation aggregation = Aggregation::kMean;
  /// Groups larger than this are rejected; raise it only to truncate
  /// explicitly with truncate_lists afterwards.
  std::size_t max_list_size = kMaxListSize;
  bool include_canaries = true;
};

/// One group per image_id, groups ordered by image_id.
std::vector<ListGroup> group_by_image(const std::vector<ScenarioRecord>& records,
                                      const GroupOptions& options = {});

struct CorpusSplit {
  std::vector<ListGroup> train;
  std::vector<ListGroup> test;
  std::uint64_t seed = 0;
  double ratio = 0.9;
  std::optional<std::string> warning;
};

CorpusSplit split_corpus(const std::vector<ListGroup>& groups, double ratio,
                         std::uint64_t seed);

/// Keeps min(n, m) items per group by seeded sampling without replacement.
/// For a fixed seed the selection for m is a subset of the one for m' >= m.
std::vector<ListGroup> truncate_lists(const std::vector<ListGroup>& groups,
                                      std::size_t m, std::uint64_t seed);

/// Keeps ceil(f * |groups|) groups chosen uniformly, in input order.
std::vector<ListGroup> subsample_fraction(const std::vector<ListGroup>& groups,
                                          double fraction, std::uint64_t seed);

/// Order-sensitive content hash over a serialized corpus.
std::string corpus_hash(const std::vector<ScenarioRecord>& records);

}  // namespace listalign
