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

#include "listalign/pipeline.h"

#include <cctype>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>

#include "listalign/errors.h"
#include "listalign/hash.h"

namespace listalign {

PreparedData prepare_data(std::vector<ScenarioRecord> records, const DataConfig& data) {
  PreparedData out;
  out.data = data;
  out.corpus_hash = corpus_hash(records);
  std::vector<ScenarioRecord> rated;
  for (const auto& r : records) {
    if (!r.ratings.empty()) rated.push_back(r);
  }
  if (rated.empty()) throw ValidationError("corpus", "corpus has no rated records");
  out.records = std::move(records);
  out.groups = group_by_image(rated);
  out.split = split_corpus(out.groups, data.split_ratio, data.split_seed);
  std::shared_ptr<const ImageFeatureTable> table;
  if (!data.image_features.empty()) {
    table = std::make_shared<const ImageFeatureTable>(ImageFeatureTable::load(data.image_features));
  }
  out.featurizer = std::make_shared<const Featurizer>(data.feature_dim, table);
  return out;
}

TrainRun run_train(const PreparedData& data, const TrainConfig& config) {
  TrainRun run;
  run.result = train(config, data.split.train, *data.featurizer);
  run.checkpoint.params = run.result.params;
  run.checkpoint.feature_dim = data.featurizer->dim();
  run.checkpoint.config = config;
  run.checkpoint.corpus_hash = data.corpus_hash;
  run.checkpoint.split_ratio = data.split.ratio;
  run.checkpoint.split_seed = data.split.seed;
  return run;
}

EvalRun run_eval(const Checkpoint& checkpoint, const PreparedData& data) {
  if (checkpoint.feature_dim != data.featurizer->dim()) {
    throw DimensionError("checkpoint feature_dim " + std::to_string(checkpoint.feature_dim) +
                         " does not match the configured feature_dim " +
                         std::to_string(data.featurizer->dim()));
  }
  EvalRun run;
  const auto split =
      split_corpus(data.groups, checkpoint.split_ratio, checkpoint.split_seed);
  if (split.test.empty()) throw ValidationError("split", "test split is empty");
  run.report = evaluate(checkpoint.params, split.test, *data.featurizer, checkpoint.config.loss);
  run.modality = modality_classification(checkpoint.params, split.test, *data.featurizer);
  if (checkpoint.corpus_hash != data.corpus_hash) {
    run.hash_mismatch = true;
    run.warning = "checkpoint was trained on corpus " + checkpoint.corpus_hash +
                  ", evaluating on corpus " + data.corpus_hash;
  }
  return run;
}

nlohmann::ordered_json eval_json(const EvalRun& run) {
  auto j = to_json(run.report);
  j["modality_accuracy"] = run.modality.accuracy;
  j["modality_macro_f1"] = run.modality.macro_f1;
  auto warnings = nlohmann::ordered_json::array();
  if (run.hash_mismatch) warnings.push_back(run.warning);
  if (run.report.unsafe_empty_denominator) {
    warnings.push_back("no gold-unsafe items in the test split; unsafe_rate reported as 0");
  }
  if (run.report.auc_degenerate) {
    warnings.push_back("test split has a single gold class; auc_safety reported as 0.5");
  }
  j["warnings"] = std::move(warnings);
  return j;
}

std::string_view ablation_axis_name(AblationAxis axis) {
  return axis == AblationAxis::kListSize ? "LIST_SIZE" : "FRACTION";
}

AblationAxis parse_ablation_axis(std::string_view name) {
  std::string up;
  for (char c : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "LIST_SIZE" || up == "LIST-SIZE" || up == "M") return AblationAxis::kListSize;
  if (up == "FRACTION" || up == "F") return AblationAxis::kFraction;
  throw ValidationError("axis", "axis must be LIST_SIZE or FRACTION, got '" +
                                    std::string(name) + "'");
}

std::vector<AblationRow> run_ablate(const PreparedData& data, const TrainConfig& config,
                                    AblationAxis axis, const std::vector<double>& values,
                                    const std::vector<std::uint64_t>& seeds) {
  if (values.empty()) throw ValidationError("values", "no ablation values");
  if (seeds.empty()) throw ValidationError("seeds", "no ablation seeds");
  std::vector<TrainConfig> configs;
  for (double v : values) {
    TrainConfig c = config;
    if (axis == AblationAxis::kListSize) {
      if (v != std::floor(v) || v < 1.0 || v > 5.0) {
        throw ValidationError("values", "list sizes must be integers in 1..5");
      }
      c.list_size = static_cast<std::size_t>(v);
    } else {
      c.fraction = v;
    }
    c.validate();
    configs.push_back(c);
  }
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (auto seed : seeds) {
      TrainConfig c = configs[i];
      c.seed = seed;
      const auto run = run_train(data, c);
      const auto eval = run_eval(run.checkpoint, data);
      rows.push_back({axis, values[i], seed, eval.report.ndcg_at_5, eval.report.unsafe_rate});
    }
  }
  return rows;
}

std::vector<double> default_ablation_values(AblationAxis axis) {
  if (axis == AblationAxis::kListSize) return {1, 2, 3, 4, 5};
  return {0.10, 0.25, 0.50, 1.00};
}

std::vector<std::uint64_t> default_ablation_seeds() { return {1, 2, 3, 4, 5}; }

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "axis,value,seed,ndcg5,unsafe_rate\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%llu,%.17g,%.17g\n",
                  std::string(ablation_axis_name(r.axis)).c_str(), r.value,
                  static_cast<unsigned long long>(r.seed), r.ndcg5, r.unsafe_rate);
    out << buf;
  }
}

nlohmann::ordered_json agreement_report(const std::vector<ScenarioRecord>& records,
                                        const Checkpoint* checkpoint, const PreparedData* data) {
  using json = nlohmann::ordered_json;
  json j;
  j["n_records"] = records.size();
  auto alpha = [](const RatingsMatrix& m) -> json {
    try {
      return krippendorff_alpha(m);
    } catch (const UndefinedError&) {
      return nullptr;
    }
  };
  std::vector<ScenarioRecord> rated;
  for (const auto& r : records) {
    if (!r.ratings.empty()) rated.push_back(r);
  }
  j["alpha"] = {{"ordinal_ratings", alpha(RatingsMatrix::from_ratings(rated))},
                {"nominal_modality", alpha(RatingsMatrix::from_modality(rated))}};

  const auto screen = screen_items(rated);
  j["item_screening"] = {{"stdev_max", kDefaultStdevMax},
                         {"kept", screen.kept.size()},
                         {"removed", screen.removed.size()},
                         {"removal_fraction", screen.removal_fraction}};
  auto flagged = json::array();
  for (const auto& d : screen_annotators(rated)) {
    if (d.flagged) {
      flagged.push_back({{"annotator_id", d.annotator_id},
                         {"mean_abs_deviation", d.mean_abs_deviation},
                         {"items", d.items}});
    }
  }
  j["annotator_screening"] = {{"flagged", flagged}};

  std::vector<std::string> annotators;
  for (const auto& r : rated) {
    if (!r.is_canary) continue;
    for (const auto& x : r.ratings) annotators.push_back(x.annotator_id);
  }
  std::sort(annotators.begin(), annotators.end());
  annotators.erase(std::unique(annotators.begin(), annotators.end()), annotators.end());
  auto canaries = json::array();
  for (const auto& a : annotators) {
    const auto c = canary_pass_rate(a, rated);
    if (c.undefined) continue;
    canaries.push_back({{"annotator_id", a},
                        {"pass_rate", c.rate},
                        {"passes", c.passes},
                        {"total", c.total},
                        {"flagged", c.flagged}});
  }
  j["canaries"] = canaries;

  j["shift_tables"] = to_json(shift_tables(rated));
  j["modality_distribution"] = to_json(modality_distribution(rated));
  j["modality_agreement"] = to_json(modality_agreement(rated));

  if (checkpoint && data) {
    const auto split = split_corpus(data->groups, checkpoint->split_ratio, checkpoint->split_seed);
    const auto m = model_annotator_agreement(checkpoint->params, split.test, *data->featurizer,
                                             checkpoint->config.loss);
    j["model_agreement"] = {{"loss", std::string(loss_name(checkpoint->config.loss))},
                            {"kendall_tau", m.kendall_tau_mean},
                            {"ndcg_at_5", m.ndcg5_mean},
                            {"groups", m.groups}};
  }
  return j;
}

std::string format_agreement_report(const nlohmann::ordered_json& j) {
  std::string out;
  char buf[256];
  auto alpha_text = [](const nlohmann::ordered_json& v) {
    if (v.is_null()) return std::string("undefined");
    char b[32];
    std::snprintf(b, sizeof(b), "%.4f", v.get<double>());
    return std::string(b);
  };
  out += "Krippendorff alpha (ordinal, ratings):   " + alpha_text(j["alpha"]["ordinal_ratings"]) + "\n";
  out += "Krippendorff alpha (nominal, modality):  " + alpha_text(j["alpha"]["nominal_modality"]) + "\n";
  const auto& s = j["item_screening"];
  std::snprintf(buf, sizeof(buf), "Items removed at stdev > %.1f: %zu of %zu (%.2f%%)\n",
                s["stdev_max"].get<double>(), s["removed"].get<std::size_t>(),
                s["removed"].get<std::size_t>() + s["kept"].get<std::size_t>(),
                100.0 * s["removal_fraction"].get<double>());
  out += buf;
  std::snprintf(buf, sizeof(buf), "Annotators flagged by deviation: %zu\n",
                j["annotator_screening"]["flagged"].size());
  out += buf;
  std::size_t canary_flags = 0;
  for (const auto& c : j["canaries"]) canary_flags += c["flagged"].get<bool>();
  std::snprintf(buf, sizeof(buf), "Annotators below canary pass rate: %zu of %zu\n\n",
                canary_flags, j["canaries"].size());
  out += buf;

  const auto& t = j["shift_tables"];
  out += "Judgment shift by modality\n";
  std::snprintf(buf, sizeof(buf), "%-10s | %7s | %7s | %7s | %7s\n", "Modality", "Up",
                "Neutral", "Down", "Total");
  out += buf;
  for (const char* m : {"image-only", "text-only", "both"}) {
    const auto& r = t["rows"][m];
    std::snprintf(buf, sizeof(buf), "%-10s | %7zu | %7zu | %7zu | %7zu\n", m,
                  r["up"].get<std::size_t>(), r["neutral"].get<std::size_t>(),
                  r["down"].get<std::size_t>(), r["total"].get<std::size_t>());
    out += buf;
  }
  out += "\nExtreme shifts (|shift| >= 3)\n";
  std::snprintf(buf, sizeof(buf), "%-10s | %7s | %7s | %7s | %7s | %7s\n", "Modality",
                "Norm +1", "Norm -1", "Up", "Down", "Total");
  out += buf;
  for (const char* m : {"image-only", "text-only", "both"}) {
    const auto& r = t["extreme"][m];
    std::snprintf(buf, sizeof(buf), "%-10s | %7zu | %7zu | %7zu | %7zu | %7zu\n", m,
                  r["norm_pos"].get<std::size_t>(), r["norm_neg"].get<std::size_t>(),
                  r["up"].get<std::size_t>(), r["down"].get<std::size_t>(),
                  r["total"].get<std::size_t>());
    out += buf;
  }
  const auto& d = j["modality_distribution"]["overall"]["proportions"];
  std::snprintf(buf, sizeof(buf), "\nModality labels: text %.3f, image %.3f, both %.3f\n",
                d["text"].get<double>(), d["image"].get<double>(), d["both"].get<double>());
  out += buf;
  if (j.contains("model_agreement")) {
    const auto& m = j["model_agreement"];
    std::snprintf(buf, sizeof(buf), "\nModel vs consensus (%s): tau %.4f, NDCG@5 %.4f over %zu groups\n",
                  m["loss"].get<std::string>().c_str(), m["kendall_tau"].get<double>(),
                  m["ndcg_at_5"].get<double>(), m["groups"].get<std::size_t>());
    out += buf;
  }
  return out;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest " + path);
  out << to_json(manifest).dump(2) << '\n';
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return to_hex(fnv1a64(bytes));
}

}  // namespace listalign
