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

#include "listalign/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "listalign/errors.h"
#include "listalign/trainer.h"

namespace listalign {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
}

double dcg(std::span<const double> gains_in_order, std::size_t k) {
  double total = 0.0;
  const std::size_t cut = std::min(k, gains_in_order.size());
  for (std::size_t i = 0; i < cut; ++i) {
    total += (std::exp2(gains_in_order[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

}  // namespace

std::vector<std::size_t> predicted_order(std::span<const double> pred) {
  std::vector<std::size_t> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pred[a] > pred[b]; });
  return order;
}

double ndcg_at_k(std::span<const double> pred, std::span<const double> gold,
                 std::size_t k) {
  require_same_length(pred, gold);
  if (pred.empty()) throw DimensionError("ndcg of an empty list");
  if (k == 0) throw ValidationError("k", "k must be at least 1");
  std::vector<double> by_pred;
  for (std::size_t idx : predicted_order(pred)) by_pred.push_back(gold[idx]);
  std::vector<double> ideal(gold.begin(), gold.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal, k);
  if (idcg == 0.0) return 1.0;
  return dcg(by_pred, k) / idcg;
}

double reciprocal_rank(std::span<const double> pred, std::span<const double> gold) {
  require_same_length(pred, gold);
  if (pred.empty()) throw DimensionError("reciprocal rank of an empty list");
  std::size_t target = 0;
  for (std::size_t i = 1; i < gold.size(); ++i) {
    if (gold[i] > gold[target]) target = i;
  }
  const auto order = predicted_order(pred);
  const auto pos = std::find(order.begin(), order.end(), target) - order.begin();
  return 1.0 / static_cast<double>(pos + 1);
}

double mrr(std::span<const ScoredList> lists) {
  if (lists.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : lists) total += reciprocal_rank(l.pred, l.gold);
  return total / static_cast<double>(lists.size());
}

UnsafeRate unsafe_rate(std::span<const double> pred, std::span<const double> gold,
                       double threshold) {
  require_same_length(pred, gold);
  std::size_t unsafe = 0;
  std::size_t missed = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] <= threshold) {
      ++unsafe;
      if (pred[i] > threshold) ++missed;
    }
  }
  if (unsafe == 0) return {0.0, true};
  return {static_cast<double>(missed) / static_cast<double>(unsafe), false};
}

std::vector<double> sweep_thresholds() {
  std::vector<double> t;
  for (int i = 10; i <= 50; ++i) t.push_back(static_cast<double>(i) / 10.0);
  return t;
}

AucSafety auc_safety(std::span<const double> pred, std::span<const double> gold) {
  require_same_length(pred, gold);
  AucSafety out;
  std::size_t positives = 0;
  for (double g : gold) positives += g <= kUnsafeThreshold;
  const std::size_t negatives = gold.size() - positives;
  for (double t : sweep_thresholds()) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] <= t) {
        if (gold[i] <= kUnsafeThreshold) ++tp;
        else ++fp;
      }
    }
    SweepPoint p;
    p.threshold = t;
    p.tpr = positives ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0;
    p.fpr = negatives ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0;
    out.sweep.push_back(p);
  }
  if (positives == 0 || negatives == 0) {
    out.degenerate = true;
    out.auc = 0.5;
    return out;
  }
  std::vector<std::pair<double, double>> curve;  // (fpr, tpr)
  curve.emplace_back(0.0, 0.0);
  for (const auto& p : out.sweep) curve.emplace_back(p.fpr, p.tpr);
  curve.emplace_back(1.0, 1.0);
  std::sort(curve.begin(), curve.end());
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].first - curve[i - 1].first) *
            (curve[i].second + curve[i - 1].second) / 2.0;
  }
  out.auc = area;
  return out;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("n", "kendall tau needs at least 2 items");
  long long concordant = 0;
  long long discordant = 0;
  long long ties_a = 0;
  long long ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0) ++ties_a;
      if (db == 0.0) ++ties_b;
      if (da == 0.0 || db == 0.0) continue;
      if ((da > 0.0) == (db > 0.0)) ++concordant;
      else ++discordant;
    }
  }
  const auto pairs = static_cast<long long>(n * (n - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(pairs - ties_a) *
                                 static_cast<double>(pairs - ties_b));
  if (denom == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

std::size_t calibration_bin(double prob, std::size_t n_bins) {
  const double b = static_cast<double>(n_bins);
  auto idx = static_cast<long>(std::ceil(prob * b)) - 1;
  idx = std::clamp<long>(idx, 0, static_cast<long>(n_bins) - 1);
  // Snap to the edges as computed below, which may differ from prob * B by an ulp.
  while (idx > 0 && prob <= static_cast<double>(idx) / b) --idx;
  while (idx + 1 < static_cast<long>(n_bins) && prob > static_cast<double>(idx + 1) / b) ++idx;
  return static_cast<std::size_t>(idx);
}

Calibration ece(std::span<const double> probs, std::span<const int> outcomes,
                std::size_t n_bins) {
  if (probs.size() != outcomes.size()) throw DimensionError("probs/outcomes length mismatch");
  if (n_bins == 0) throw ValidationError("n_bins", "need at least one bin");
  Calibration out;
  std::vector<double> sum_pred(n_bins, 0.0);
  std::vector<double> sum_out(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("probs", "probability outside [0, 1]");
    }
    if (outcomes[i] != 0 && outcomes[i] != 1) {
      throw ValidationError("outcomes", "outcomes must be 0 or 1");
    }
    const std::size_t b = calibration_bin(p, n_bins);
    sum_pred[b] += p;
    sum_out[b] += outcomes[i];
    ++count[b];
  }
  const double total = static_cast<double>(probs.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    ReliabilityBin bin;
    bin.bin_lo = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.bin_hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    bin.count = count[b];
    if (count[b] > 0) {
      bin.mean_predicted = sum_pred[b] / static_cast<double>(count[b]);
      bin.observed_freq = sum_out[b] / static_cast<double>(count[b]);
      out.ece += (static_cast<double>(count[b]) / total) *
                 std::fabs(bin.mean_predicted - bin.observed_freq);
    }
    out.bins.push_back(bin);
  }
  return out;
}

double acceptability_probability(double scale_score) {
  return std::clamp((scale_score - 1.0) / 4.0, 0.0, 1.0);
}

MetricReport evaluate_scores(const std::vector<ListGroup>& groups,
                             const std::vector<std::vector<double>>& scores) {
  if (groups.size() != scores.size()) throw DimensionError("one score list per group");
  if (groups.empty()) throw ValidationError("groups", "evaluation set is empty");
  MetricReport r;
  std::vector<double> pooled_pred;
  std::vector<double> pooled_gold;
  double ndcg_sum = 0.0;
  double rr_sum = 0.0;
  double tau_sum = 0.0;
  std::size_t tau_groups = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto gold = groups[g].gold();
    const auto& pred = scores[g];
    ndcg_sum += ndcg_at_k(pred, gold, 5);
    rr_sum += reciprocal_rank(pred, gold);
    if (gold.size() >= 2) {
      tau_sum += kendall_tau(pred, gold);
      ++tau_groups;
    }
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_gold.insert(pooled_gold.end(), gold.begin(), gold.end());
  }
  const double n = static_cast<double>(groups.size());
  r.ndcg_at_5 = ndcg_sum / n;
  r.mrr = rr_sum / n;
  r.kendall_tau = tau_groups ? tau_sum / static_cast<double>(tau_groups) : 0.0;

  const auto ur = unsafe_rate(pooled_pred, pooled_gold);
  r.unsafe_rate = ur.value;
  r.unsafe_empty_denominator = ur.empty_denominator;
  const auto auc = auc_safety(pooled_pred, pooled_gold);
  r.auc_safety = auc.auc;
  r.auc_degenerate = auc.degenerate;

  std::vector<double> probs;
  std::vector<int> outcomes;
  for (std::size_t i = 0; i < pooled_pred.size(); ++i) {
    probs.push_back(acceptability_probability(pooled_pred[i]));
    outcomes.push_back(pooled_gold[i] > kUnsafeThreshold ? 1 : 0);
  }
  auto cal = ece(probs, outcomes, 10);
  r.ece = cal.ece;
  r.reliability_bins = std::move(cal.bins);
  r.n_groups = groups.size();
  r.n_scenarios = pooled_pred.size();
  return r;
}

MetricReport evaluate(const ScorerParams& params, const std::vector<ListGroup>& groups,
                      const Featurizer& featurizer, LossType type) {
  std::vector<std::vector<double>> scores;
  scores.reserve(groups.size());
  for (const auto& g : groups) scores.push_back(scale_scores(params, g, featurizer, type));
  return evaluate_scores(groups, scores);
}

nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["ndcg_at_5"] = r.ndcg_at_5;
  j["mrr"] = r.mrr;
  j["unsafe_rate"] = r.unsafe_rate;
  j["auc_safety"] = r.auc_safety;
  j["kendall_tau"] = r.kendall_tau;
  j["ece"] = r.ece;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : r.reliability_bins) {
    bins.push_back({{"bin_lo", b.bin_lo},
                    {"bin_hi", b.bin_hi},
                    {"mean_predicted", b.mean_predicted},
                    {"observed_freq", b.observed_freq},
                    {"count", b.count}});
  }
  j["reliability_bins"] = std::move(bins);
  return j;
}

MetricReport metric_report_from_json(const nlohmann::ordered_json& j) {
  MetricReport r;
  r.ndcg_at_5 = j.at("ndcg_at_5").get<double>();
  r.mrr = j.at("mrr").get<double>();
  r.unsafe_rate = j.at("unsafe_rate").get<double>();
  r.auc_safety = j.at("auc_safety").get<double>();
  r.kendall_tau = j.at("kendall_tau").get<double>();
  r.ece = j.at("ece").get<double>();
  for (const auto& b : j.at("reliability_bins")) {
    ReliabilityBin bin;
    bin.bin_lo = b.at("bin_lo").get<double>();
    bin.bin_hi = b.at("bin_hi").get<double>();
    bin.mean_predicted = b.at("mean_predicted").get<double>();
    bin.observed_freq = b.at("observed_freq").get<double>();
    bin.count = b.at("count").get<std::size_t>();
    r.reliability_bins.push_back(bin);
    r.n_scenarios += bin.count;
  }
  return r;
}

std::string format_metric_table(const std::vector<TableRow>& rows) {
  std::size_t label_width = 11;
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s | %7s | %7s | %11s | %10s\n",
                static_cast<int>(label_width), "Supervision", "NDCG@5", "MRR",
                "Unsafe Rate", "AUC-Safety");
  out << buf;
  out << std::string(label_width, '-') << "-+---------+---------+-------------+-----------\n";
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s | %7.4f | %7.4f | %11.4f | %10.4f\n",
                  static_cast<int>(label_width), row.label.c_str(), row.report.ndcg_at_5,
                  row.report.mrr, row.report.unsafe_rate, row.report.auc_safety);
    out << buf;
  }
  return out.str();
}

ModalityAccuracy modality_classification(const ScorerParams& params,
                                         const std::vector<ListGroup>& groups,
                                         const Featurizer& featurizer) {
  std::array<std::array<std::size_t, 3>, 3> confusion{};  // [truth][predicted]
  ModalityAccuracy out;
  for (const auto& g : groups) {
    for (const auto& item : g.items) {
      if (!item.modality) continue;
      const auto logits = modality_logits(params, featurizer.features(g, item));
      const auto pred = static_cast<std::size_t>(
          std::max_element(logits.begin(), logits.end()) - logits.begin());
      ++confusion[static_cast<std::size_t>(*item.modality)][pred];
      ++out.count;
    }
  }
  if (out.count == 0) return out;
  std::size_t correct = 0;
  double f1_sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    correct += confusion[k][k];
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      predicted += confusion[o][k];
      actual += confusion[k][o];
    }
    const double tp = static_cast<double>(confusion[k][k]);
    const double denom = static_cast<double>(predicted + actual);
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.count);
  out.macro_f1 = f1_sum / 3.0;
  return out;
}

}  // namespace listalign
