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

#include "listalign/agreement.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "listalign/errors.h"
#include "listalign/metrics.h"
#include "listalign/trainer.h"

namespace listalign {

namespace {

template <class Value>
RatingsMatrix build_matrix(const std::vector<ScenarioRecord>& records, MeasureLevel level,
                           Value value_of) {
  RatingsMatrix m;
  m.level = level;
  std::map<std::string, std::size_t> column;
  for (const auto& r : records) {
    value_of(r, [&](const std::string& who, int) {
      if (column.emplace(who, 0).second) m.annotators.push_back(who);
    });
  }
  std::sort(m.annotators.begin(), m.annotators.end());
  for (std::size_t i = 0; i < m.annotators.size(); ++i) column[m.annotators[i]] = i;
  for (const auto& r : records) {
    std::vector<std::optional<int>> row(m.annotators.size());
    value_of(r, [&](const std::string& who, int v) { row[column[who]] = v; });
    m.cells.push_back(std::move(row));
  }
  return m;
}

constexpr std::array<Modality, 3> kTableOrder = {Modality::kImage, Modality::kText,
                                                 Modality::kBoth};

const char* table_label(Modality m) {
  switch (m) {
    case Modality::kImage:
      return "image-only";
    case Modality::kText:
      return "text-only";
    case Modality::kBoth:
      return "both";
  }
  return "";
}

void finish_stratum(ModalityStratum& s) {
  std::size_t total = 0;
  for (auto c : s.counts) total += c;
  s.zero_count = total == 0;
  for (std::size_t k = 0; k < 3; ++k) {
    s.proportions[k] =
        total ? static_cast<double>(s.counts[k]) / static_cast<double>(total) : 0.0;
  }
}

}  // namespace

RatingsMatrix RatingsMatrix::from_ratings(const std::vector<ScenarioRecord>& records) {
  return build_matrix(records, MeasureLevel::kOrdinal, [](const ScenarioRecord& r, auto emit) {
    for (const auto& rating : r.ratings) emit(rating.annotator_id, rating.score);
  });
}

RatingsMatrix RatingsMatrix::from_modality(const std::vector<ScenarioRecord>& records) {
  return build_matrix(records, MeasureLevel::kNominal, [](const ScenarioRecord& r, auto emit) {
    for (const auto& label : r.modality_labels) {
      emit(label.annotator_id, static_cast<int>(label.modality));
    }
  });
}

double krippendorff_alpha(const RatingsMatrix& matrix) {
  std::set<int> distinct;
  for (const auto& row : matrix.cells) {
    std::size_t present = 0;
    for (const auto& c : row) present += c.has_value();
    if (present < 2) continue;
    for (const auto& c : row) {
      if (c) distinct.insert(*c);
    }
  }
  const std::vector<int> values(distinct.begin(), distinct.end());
  const std::size_t v = values.size();
  auto index_of = [&](int x) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), x) -
                                    values.begin());
  };

  // Coincidence matrix over pairable values.
  std::vector<std::vector<double>> o(v, std::vector<double>(v, 0.0));
  for (const auto& row : matrix.cells) {
    std::vector<std::size_t> unit;
    for (const auto& c : row) {
      if (c) unit.push_back(index_of(*c));
    }
    if (unit.size() < 2) continue;
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t i = 0; i < unit.size(); ++i) {
      for (std::size_t j = 0; j < unit.size(); ++j) {
        if (i != j) o[unit[i]][unit[j]] += w;
      }
    }
  }
  std::vector<double> n_c(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) n_c[c] += o[c][k];
    n += n_c[c];
  }
  if (n < 2.0) throw UndefinedError("krippendorff alpha: fewer than two pairable values");

  auto delta2 = [&](std::size_t c, std::size_t k) {
    if (c == k) return 0.0;
    if (matrix.level == MeasureLevel::kNominal) return 1.0;
    const std::size_t lo = std::min(c, k);
    const std::size_t hi = std::max(c, k);
    double s = 0.0;
    for (std::size_t g = lo; g <= hi; ++g) s += n_c[g];
    s -= (n_c[c] + n_c[k]) / 2.0;
    return s * s;
  };

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) {
      const double d = delta2(c, k);
      observed += o[c][k] * d;
      expected += n_c[c] * n_c[k] * d;
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

double sample_stdev(const std::vector<Rating>& ratings) {
  if (ratings.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& r : ratings) mean += r.score;
  mean /= static_cast<double>(ratings.size());
  double ss = 0.0;
  for (const auto& r : ratings) ss += (r.score - mean) * (r.score - mean);
  return std::sqrt(ss / static_cast<double>(ratings.size() - 1));
}

ScreenResult screen_items(const std::vector<ScenarioRecord>& records, double stdev_max) {
  ScreenResult out;
  for (const auto& r : records) {
    if (r.ratings.size() >= 2 && sample_stdev(r.ratings) > stdev_max) {
      out.removed.push_back(r);
    } else {
      out.kept.push_back(r);
    }
  }
  if (!records.empty()) {
    out.removal_fraction =
        static_cast<double>(out.removed.size()) / static_cast<double>(records.size());
  }
  return out;
}

std::vector<AnnotatorDeviation> screen_annotators(const std::vector<ScenarioRecord>& records,
                                                  double max_deviation) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.ratings.size() < 2) continue;
    const double mean = r.mean_rating();
    for (const auto& rating : r.ratings) {
      auto& [sum, count] = acc[rating.annotator_id];
      sum += std::fabs(rating.score - mean);
      ++count;
    }
  }
  std::vector<AnnotatorDeviation> out;
  for (const auto& [who, sc] : acc) {
    AnnotatorDeviation d;
    d.annotator_id = who;
    d.items = sc.second;
    d.mean_abs_deviation = sc.first / static_cast<double>(sc.second);
    d.flagged = d.mean_abs_deviation > max_deviation;
    out.push_back(d);
  }
  return out;
}

CanaryResult canary_pass_rate(const std::string& annotator_id,
                              const std::vector<ScenarioRecord>& records, int band,
                              double min_rate) {
  CanaryResult out;
  for (const auto& r : records) {
    if (!r.is_canary || !r.canary_gold) continue;
    for (const auto& rating : r.ratings) {
      if (rating.annotator_id != annotator_id) continue;
      ++out.total;
      if (std::abs(rating.score - *r.canary_gold) <= band) ++out.passes;
    }
  }
  if (out.total == 0) {
    out.undefined = true;
    return out;
  }
  out.rate = static_cast<double>(out.passes) / static_cast<double>(out.total);
  out.flagged = out.rate < min_rate;
  return out;
}

std::string_view shift_direction_name(ShiftDirection d) {
  switch (d) {
    case ShiftDirection::kUp:
      return "up";
    case ShiftDirection::kNeutral:
      return "neutral";
    case ShiftDirection::kDown:
      return "down";
  }
  return "neutral";
}

ShiftRecord shift_direction(int norm_label, double consensus, const ShiftOptions& options) {
  if (norm_label != 1 && norm_label != -1) {
    throw ValidationError("norm_label", "norm label must be +1 or -1, got " +
                                            std::to_string(norm_label));
  }
  ShiftRecord s;
  s.norm_label = norm_label;
  s.consensus = consensus;
  const double baseline =
      norm_label == 1 ? options.positive_baseline : options.negative_baseline;
  s.shift = consensus - baseline;
  if (std::fabs(s.shift) <= options.neutral_band) {
    s.direction = ShiftDirection::kNeutral;
  } else {
    s.direction = s.shift < 0.0 ? ShiftDirection::kDown : ShiftDirection::kUp;
  }
  s.extreme = std::fabs(s.shift) >= options.extreme_threshold;
  return s;
}

ShiftTables shift_tables(const std::vector<ScenarioRecord>& records,
                         const ShiftOptions& options) {
  ShiftTables t;
  for (const auto& r : records) {
    const auto modality = r.majority_modality();
    if (!r.norm_label || !modality || r.ratings.empty()) {
      ++t.skipped;
      continue;
    }
    const auto s = shift_direction(*r.norm_label, r.mean_rating(), options);
    const auto m = static_cast<std::size_t>(*modality);
    auto& row = t.rows[m];
    switch (s.direction) {
      case ShiftDirection::kUp:
        ++row.up;
        break;
      case ShiftDirection::kNeutral:
        ++row.neutral;
        break;
      case ShiftDirection::kDown:
        ++row.down;
        break;
    }
    ++row.total;
    ++t.grand_total;
    if (s.extreme) {
      auto& ex = t.extreme[m];
      ++(s.norm_label == 1 ? ex.positive_norm : ex.negative_norm);
      ++(s.shift > 0.0 ? ex.up : ex.down);
      ++ex.total;
    }
  }
  return t;
}

std::string format_shift_table(const ShiftTables& t) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s | %9s | %9s | %9s | %9s\n", "Modality", "Up",
                "Neutral", "Down", "Total");
  out << buf << "-----------+-----------+-----------+-----------+----------\n";
  for (Modality m : kTableOrder) {
    const auto& row = t.rows[static_cast<std::size_t>(m)];
    std::snprintf(buf, sizeof(buf), "%-10s | %9zu | %9zu | %9zu | %9zu\n", table_label(m),
                  row.up, row.neutral, row.down, row.total);
    out << buf;
  }
  return out.str();
}

std::string format_extreme_table(const ShiftTables& t) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s | %8s | %8s | %8s | %8s | %8s\n", "Modality",
                "Norm +1", "Norm -1", "Up", "Down", "Extreme");
  out << buf << "-----------+----------+----------+----------+----------+---------\n";
  for (Modality m : kTableOrder) {
    const auto& ex = t.extreme[static_cast<std::size_t>(m)];
    std::snprintf(buf, sizeof(buf), "%-10s | %8zu | %8zu | %8zu | %8zu | %8zu\n",
                  table_label(m), ex.positive_norm, ex.negative_norm, ex.up, ex.down,
                  ex.total);
    out << buf;
  }
  return out.str();
}

std::string shift_tables_csv(const ShiftTables& t) {
  std::ostringstream out;
  out << "modality,up,neutral,down,total,extreme_norm_pos,extreme_norm_neg,extreme_up,"
         "extreme_down,extreme_total\n";
  for (Modality m : kTableOrder) {
    const auto& row = t.rows[static_cast<std::size_t>(m)];
    const auto& ex = t.extreme[static_cast<std::size_t>(m)];
    out << table_label(m) << ',' << row.up << ',' << row.neutral << ',' << row.down << ','
        << row.total << ',' << ex.positive_norm << ',' << ex.negative_norm << ',' << ex.up
        << ',' << ex.down << ',' << ex.total << '\n';
  }
  return out.str();
}

ModalityDistribution modality_distribution(const std::vector<ScenarioRecord>& records) {
  ModalityDistribution d;
  for (const auto& r : records) {
    for (const auto& label : r.modality_labels) {
      const auto m = static_cast<std::size_t>(label.modality);
      ++d.overall.counts[m];
      auto it = std::find_if(r.ratings.begin(), r.ratings.end(), [&](const Rating& x) {
        return x.annotator_id == label.annotator_id;
      });
      if (it != r.ratings.end()) ++d.by_rating[static_cast<std::size_t>(it->score - 1)].counts[m];
    }
  }
  finish_stratum(d.overall);
  for (auto& s : d.by_rating) finish_stratum(s);
  return d;
}

std::string format_modality_distribution(const ModalityDistribution& d) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-8s | %7s | %7s | %7s | %6s\n", "Rating", "text", "image",
                "both", "count");
  out << buf << "---------+---------+---------+---------+-------\n";
  auto line = [&](const std::string& label, const ModalityStratum& s) {
    std::size_t total = s.counts[0] + s.counts[1] + s.counts[2];
    std::snprintf(buf, sizeof(buf), "%-8s | %7.4f | %7.4f | %7.4f | %6zu\n", label.c_str(),
                  s.proportions[0], s.proportions[1], s.proportions[2], total);
    out << buf;
  };
  for (std::size_t level = 0; level < 5; ++level) {
    line(std::to_string(level + 1), d.by_rating[level]);
  }
  line("all", d.overall);
  return out.str();
}

ModalityAgreement modality_agreement(const std::vector<ScenarioRecord>& records) {
  ModalityAgreement a;
  std::array<double, 3> agree_pairs{};
  std::array<double, 3> all_pairs{};
  std::array<double, 3> match{};
  std::array<double, 3> labels{};
  for (const auto& r : records) {
    const auto majority = r.majority_modality();
    if (!majority || r.modality_labels.size() < 2) continue;
    const auto m = static_cast<std::size_t>(*majority);
    ++a.items[m];
    const auto& ls = r.modality_labels;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      labels[m] += 1.0;
      match[m] += ls[i].modality == *majority;
      for (std::size_t j = i + 1; j < ls.size(); ++j) {
        all_pairs[m] += 1.0;
        agree_pairs[m] += ls[i].modality == ls[j].modality;
      }
    }
  }
  for (std::size_t m = 0; m < 3; ++m) {
    a.pairwise[m] = all_pairs[m] > 0 ? agree_pairs[m] / all_pairs[m] : 0.0;
    a.majority_match[m] = labels[m] > 0 ? match[m] / labels[m] : 0.0;
  }
  return a;
}

ModelAgreement model_annotator_agreement(const std::vector<ListGroup>& groups,
                                         const std::vector<std::vector<double>>& scores) {
  if (groups.size() != scores.size()) throw DimensionError("one score list per group");
  ModelAgreement out;
  double tau = 0.0;
  double ndcg = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) continue;
    const auto gold = groups[g].gold();
    tau += kendall_tau(scores[g], gold);
    ndcg += ndcg_at_k(scores[g], gold, 5);
    ++out.groups;
  }
  if (out.groups > 0) {
    out.kendall_tau_mean = tau / static_cast<double>(out.groups);
    out.ndcg5_mean = ndcg / static_cast<double>(out.groups);
  }
  return out;
}

ModelAgreement model_annotator_agreement(const ScorerParams& params,
                                         const std::vector<ListGroup>& groups,
                                         const Featurizer& featurizer, LossType type) {
  std::vector<std::vector<double>> scores;
  scores.reserve(groups.size());
  for (const auto& g : groups) scores.push_back(scale_scores(params, g, featurizer, type));
  return model_annotator_agreement(groups, scores);
}

nlohmann::ordered_json to_json(const ShiftTables& t) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::object();
  auto extreme = nlohmann::ordered_json::object();
  for (Modality m : kTableOrder) {
    const auto& row = t.rows[static_cast<std::size_t>(m)];
    const auto& ex = t.extreme[static_cast<std::size_t>(m)];
    rows[table_label(m)] = {
        {"up", row.up}, {"neutral", row.neutral}, {"down", row.down}, {"total", row.total}};
    extreme[table_label(m)] = {{"norm_pos", ex.positive_norm},
                               {"norm_neg", ex.negative_norm},
                               {"up", ex.up},
                               {"down", ex.down},
                               {"total", ex.total}};
  }
  j["rows"] = std::move(rows);
  j["extreme"] = std::move(extreme);
  j["grand_total"] = t.grand_total;
  j["skipped"] = t.skipped;
  return j;
}

nlohmann::ordered_json to_json(const ModalityDistribution& d) {
  auto stratum = [](const ModalityStratum& s) {
    nlohmann::ordered_json j;
    j["counts"] = {{"text", s.counts[0]}, {"image", s.counts[1]}, {"both", s.counts[2]}};
    j["proportions"] = {
        {"text", s.proportions[0]}, {"image", s.proportions[1]}, {"both", s.proportions[2]}};
    j["zero_count"] = s.zero_count;
    return j;
  };
  nlohmann::ordered_json j;
  j["overall"] = stratum(d.overall);
  auto levels = nlohmann::ordered_json::object();
  for (std::size_t level = 0; level < 5; ++level) {
    levels[std::to_string(level + 1)] = stratum(d.by_rating[level]);
  }
  j["by_rating"] = std::move(levels);
  return j;
}

nlohmann::ordered_json to_json(const ModalityAgreement& a) {
  nlohmann::ordered_json j;
  for (std::size_t m = 0; m < 3; ++m) {
    j[std::string(modality_name(static_cast<Modality>(m)))] = {
        {"items", a.items[m]},
        {"pairwise_agreement", a.pairwise[m]},
        {"majority_match", a.majority_match[m]}};
  }
  return j;
}

}  // namespace listalign
