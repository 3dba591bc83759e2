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

// Train / evaluate / ablate drivers shared by the command-line tool and the
// test suites, plus the run manifest written beside every output.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "listalign/agreement.h"
#include "listalign/checkpoint.h"
#include "listalign/config.h"
#include "listalign/corpus.h"
#include "listalign/featurizer.h"
#include "listalign/metrics.h"
#include "listalign/trainer.h"

namespace listalign {

/// Corpus grouped, split, and paired with its featurizer.
struct PreparedData {
  std::vector<ScenarioRecord> records;
  std::string corpus_hash;
  std::vector<ListGroup> groups;
  CorpusSplit split;
  std::shared_ptr<const Featurizer> featurizer;
  DataConfig data;
};

/// Rated records are grouped by image and split; unrated proposals are skipped.
PreparedData prepare_data(std::vector<ScenarioRecord> records, const DataConfig& data);

struct TrainRun {
  Checkpoint checkpoint;
  TrainResult result;
};

TrainRun run_train(const PreparedData& data, const TrainConfig& config);

struct EvalRun {
  MetricReport report;
  ModalityAccuracy modality;
  bool hash_mismatch = false;
  std::string warning;
};

/// Evaluates on the test side of the split recorded in the checkpoint.
EvalRun run_eval(const Checkpoint& checkpoint, const PreparedData& data);

/// Metric JSON for cmd_eval: the report plus a "warnings" array.
nlohmann::ordered_json eval_json(const EvalRun& run);

enum class AblationAxis { kListSize, kFraction };

std::string_view ablation_axis_name(AblationAxis axis);
AblationAxis parse_ablation_axis(std::string_view name);

struct AblationRow {
  AblationAxis axis = AblationAxis::kListSize;
  double value = 0.0;
  std::uint64_t seed = 0;
  double ndcg5 = 0.0;
  double unsafe_rate = 0.0;
};

/// One train+eval per (value, seed), values outer. The seed replaces
/// config.seed; the value replaces list_size or fraction.
std::vector<AblationRow> run_ablate(const PreparedData& data, const TrainConfig& config,
                                    AblationAxis axis, const std::vector<double>& values,
                                    const std::vector<std::uint64_t>& seeds);

std::vector<double> default_ablation_values(AblationAxis axis);
std::vector<std::uint64_t> default_ablation_seeds();

/// Header "axis,value,seed,ndcg5,unsafe_rate"; reals in %.17g.
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

/// Agreement statistics as JSON: alpha (ordinal ratings, nominal modality;
/// null when undefined), item and annotator screening, canary pass rates,
/// shift tables, modality distribution and agreement. With a checkpoint,
/// adds the model-vs-consensus rows on the test split.
nlohmann::ordered_json agreement_report(const std::vector<ScenarioRecord>& records,
                                        const Checkpoint* checkpoint = nullptr,
                                        const PreparedData* data = nullptr);

/// Human-readable rendering of agreement_report().
std::string format_agreement_report(const nlohmann::ordered_json& report);

struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::uint64_t> seeds;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();   // role -> {path, hash}
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();  // role -> path
  double wall_clock_seconds = 0.0;
};

nlohmann::ordered_json to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::string& path);

/// Content hash of a file (FNV-1a 64, hex).
std::string file_hash(const std::string& path);

}  // namespace listalign
