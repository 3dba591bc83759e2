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

// Ranking metrics (NDCG@k, MRR, Kendall tau-b), score metrics (Unsafe Rate,
// AUC-Safety by threshold sweep) and calibration (ECE with reliability bins).
// Predicted-order ties are broken by ascending item index everywhere.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "listalign/corpus.h"
#include "listalign/featurizer.h"
#include "listalign/losses.h"
#include "listalign/scorer.h"

namespace listalign {

/// Indices by descending prediction, ties by ascending index.
std::vector<std::size_t> predicted_order(std::span<const double> pred);

/// DCG@k / IDCG@k with gain 2^rel - 1 and discount log2(i + 1).
double ndcg_at_k(std::span<const double> pred, std::span<const double> gold,
                 std::size_t k);

/// 1 / (predicted rank of the top gold item); ties among gold maxima resolve
/// to the lowest index.
double reciprocal_rank(std::span<const double> pred, std::span<const double> gold);

struct ScoredList {
  std::vector<double> pred;
  std::vector<double> gold;
};

double mrr(std::span<const ScoredList> lists);

struct UnsafeRate {
  double value = 0.0;
  bool empty_denominator = false;
};

/// #{pred > t and gold <= t} / #{gold <= t}.
UnsafeRate unsafe_rate(std::span<const double> pred, std::span<const double> gold,
                       double threshold = kUnsafeThreshold);

struct SweepPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Thresholds 1.0, 1.1, ..., 5.0 (41 points).
std::vector<double> sweep_thresholds();

struct AucSafety {
  double auc = 0.5;
  std::vector<SweepPoint> sweep;
  bool degenerate = false;  // one of the classes is absent
};

/// Positive class = gold unsafe; predicted positive at t iff pred <= t. The
/// curve is (0,0), the sweep, (1,1), integrated by the trapezoidal rule.
AucSafety auc_safety(std::span<const double> pred, std::span<const double> gold);

/// Tie-corrected tau-b; 0 when either side is entirely tied.
double kendall_tau(std::span<const double> a, std::span<const double> b);

struct ReliabilityBin {
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  double mean_predicted = 0.0;
  double observed_freq = 0.0;
  std::size_t count = 0;
};

struct Calibration {
  double ece = 0.0;
  std::vector<ReliabilityBin> bins;
};

/// Equal-width bins on [0,1]: [0, 1/B], (1/B, 2/B], ..., ((B-1)/B, 1].
std::size_t calibration_bin(double prob, std::size_t n_bins);

Calibration ece(std::span<const double> probs, std::span<const int> outcomes,
                std::size_t n_bins = 10);

/// Predicted acceptability on the rating scale: clamp((s - 1) / 4, 0, 1).
double acceptability_probability(double scale_score);

struct MetricReport {
  double ndcg_at_5 = 0.0;
  double mrr = 0.0;
  double unsafe_rate = 0.0;
  double auc_safety = 0.5;
  double kendall_tau = 0.0;
  double ece = 0.0;
  std::vector<ReliabilityBin> reliability_bins;

  // Not serialized.
  bool unsafe_empty_denominator = false;
  bool auc_degenerate = false;
  std::size_t n_groups = 0;
  std::size_t n_scenarios = 0;
};

/// Per-group NDCG@5 / MRR / tau (tau over groups with 2+ items), pooled
/// Unsafe Rate / AUC-Safety / ECE. `scores` are on the rating scale.
MetricReport evaluate_scores(const std::vector<ListGroup>& groups,
                             const std::vector<std::vector<double>>& scores);

MetricReport evaluate(const ScorerParams& params, const std::vector<ListGroup>& groups,
                      const Featurizer& featurizer, LossType type);

nlohmann::ordered_json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const nlohmann::ordered_json& j);

struct TableRow {
  std::string label;
  MetricReport report;
};

/// Aligned text table: NDCG@5 | MRR | Unsafe Rate | AUC-Safety.
std::string format_metric_table(const std::vector<TableRow>& rows);

struct ModalityAccuracy {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t count = 0;
};

/// Argmax of the modality head against majority labels, over labeled items.
ModalityAccuracy modality_classification(const ScorerParams& params,
                                         const std::vector<ListGroup>& groups,
                                         const Featurizer& featurizer);

}  // namespace listalign
