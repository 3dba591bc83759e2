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

// Annotator-side statistics: Krippendorff's alpha, item and annotator
// screening, canary pass rates, modality distributions, and the judgment-shift
// tables relating image-grounded consensus ratings to text-only norm labels.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "listalign/corpus.h"
#include "listalign/featurizer.h"
#include "listalign/losses.h"
#include "listalign/scorer.h"

namespace listalign {

enum class MeasureLevel { kOrdinal, kNominal };

/// Items x annotators grid; empty cells are missing values.
struct RatingsMatrix {
  MeasureLevel level = MeasureLevel::kOrdinal;
  std::vector<std::string> annotators;
  std::vector<std::vector<std::optional<int>>> cells;

  /// Scalar ratings (ordinal), one row per record.
  static RatingsMatrix from_ratings(const std::vector<ScenarioRecord>& records);
  /// Modality labels (nominal, coded text=0, image=1, both=2).
  static RatingsMatrix from_modality(const std::vector<ScenarioRecord>& records);
};

/// alpha = 1 - (n - 1) * sum o_ck d_ck / sum n_c n_k d_ck over the coincidence
/// matrix of pairable values, with the rank-based ordinal metric or the 0/1
/// nominal metric. Throws UndefinedError with fewer than two pairable values.
/// A matrix whose pairable values are all identical yields 1.
double krippendorff_alpha(const RatingsMatrix& matrix);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_stdev(const std::vector<Rating>& ratings);

struct ScreenResult {
  std::vector<ScenarioRecord> kept;
  std::vector<ScenarioRecord> removed;
  double removal_fraction = 0.0;
};

inline constexpr double kDefaultStdevMax = 1.2;

/// Drops records whose rating stdev exceeds stdev_max; records with fewer
/// than two ratings are always kept.
ScreenResult screen_items(const std::vector<ScenarioRecord>& records,
                          double stdev_max = kDefaultStdevMax);

struct AnnotatorDeviation {
  std::string annotator_id;
  double mean_abs_deviation = 0.0;  // from the item mean rating
  std::size_t items = 0;
  bool flagged = false;
};

/// Per-annotator variance screening over items with 2+ ratings.
std::vector<AnnotatorDeviation> screen_annotators(
    const std::vector<ScenarioRecord>& records, double max_deviation = 1.5);

struct CanaryResult {
  double rate = 0.0;
  std::size_t passes = 0;
  std::size_t total = 0;
  bool flagged = false;
  bool undefined = false;  // annotator rated no canaries
};

/// A canary passes when |rating - canary_gold| <= band; the annotator is
/// flagged when the pass rate is strictly below min_rate.
CanaryResult canary_pass_rate(const std::string& annotator_id,
                              const std::vector<ScenarioRecord>& records,
                              int band = 1, double min_rate = 0.98);

enum class ShiftDirection { kUp, kNeutral, kDown };

std::string_view shift_direction_name(ShiftDirection d);

struct ShiftOptions {
  double neutral_band = 1.0;
  double positive_baseline = 5.0;  // scalar implied by norm label +1
  double negative_baseline = 1.0;  // scalar implied by norm label -1
  double extreme_threshold = 3.0;
};

struct ShiftRecord {
  std::string scenario_id;
  int norm_label = 1;
  double consensus = 0.0;
  std::optional<Modality> modality;
  double shift = 0.0;
  ShiftDirection direction = ShiftDirection::kNeutral;
  bool extreme = false;
};

/// shift = consensus - baseline(norm_label). Throws ValidationError for a
/// norm label other than +1 / -1.
ShiftRecord shift_direction(int norm_label, double consensus,
                            const ShiftOptions& options = {});

struct ShiftRow {
  std::size_t up = 0;
  std::size_t neutral = 0;
  std::size_t down = 0;
  std::size_t total = 0;
};

struct ExtremeRow {
  std::size_t positive_norm = 0;  // norm label +1
  std::size_t negative_norm = 0;  // norm label -1
  std::size_t up = 0;
  std::size_t down = 0;
  std::size_t total = 0;
};

/// Rows indexed by Modality (text, image, both).
struct ShiftTables {
  std::array<ShiftRow, 3> rows{};
  std::array<ExtremeRow, 3> extreme{};
  std::size_t grand_total = 0;
  std::size_t skipped = 0;  // missing norm label, modality label, or rating
};

/// Modality per record = majority of its labels (ties to both).
ShiftTables shift_tables(const std::vector<ScenarioRecord>& records,
                         const ShiftOptions& options = {});

/// Rows in the order image-only, text-only, both.
std::string format_shift_table(const ShiftTables& tables);
std::string format_extreme_table(const ShiftTables& tables);
std::string shift_tables_csv(const ShiftTables& tables);

struct ModalityStratum {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> proportions{};
  bool zero_count = true;
};

struct ModalityDistribution {
  ModalityStratum overall;
  std::array<ModalityStratum, 5> by_rating{};  // rating levels 1..5
};

/// Each modality label is stratified by the same annotator's rating on that
/// record; labels without a matching rating count only toward the overall.
ModalityDistribution modality_distribution(const std::vector<ScenarioRecord>& records);

std::string format_modality_distribution(const ModalityDistribution& dist);

/// Two readings of "modality agreement", per majority modality:
/// pairwise = share of annotator pairs on an item giving the same label;
/// majority_match = share of labels equal to the item's majority label.
struct ModalityAgreement {
  std::array<double, 3> pairwise{};
  std::array<double, 3> majority_match{};
  std::array<std::size_t, 3> items{};
};

ModalityAgreement modality_agreement(const std::vector<ScenarioRecord>& records);

struct ModelAgreement {
  double kendall_tau_mean = 0.0;
  double ndcg5_mean = 0.0;
  std::size_t groups = 0;
};

/// Mean per-group tau and NDCG@5 of model scores against consensus gold,
/// over groups with at least two items.
ModelAgreement model_annotator_agreement(const std::vector<ListGroup>& groups,
                                         const std::vector<std::vector<double>>& scores);

ModelAgreement model_annotator_agreement(const ScorerParams& params,
                                         const std::vector<ListGroup>& groups,
                                         const Featurizer& featurizer, LossType type);

nlohmann::ordered_json to_json(const ShiftTables& tables);
nlohmann::ordered_json to_json(const ModalityDistribution& dist);
nlohmann::ordered_json to_json(const ModalityAgreement& agreement);

}  // namespace listalign
