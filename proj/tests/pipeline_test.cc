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

#include <gtest/gtest.h>

#include <sstream>

#include "listalign/errors.h"
#include "listalign/synth.h"

namespace listalign {
namespace {

const std::vector<ScenarioRecord>& corpus() {
  static const auto records = [] {
    SynthConfig c;
    c.n_groups = 120;
    c.feature_dim = 32;
    return generate_synthetic(c).records;
  }();
  return records;
}

DataConfig data_config() {
  DataConfig d;
  d.feature_dim = 32;
  d.split_ratio = 0.75;
  return d;
}

TrainConfig quick() {
  TrainConfig t;
  t.lr = 1e-3;
  t.epochs = 2;
  t.hidden = 8;
  return t;
}

TEST(Prepare, GroupsRatedRecordsOnly) {
  auto records = corpus();
  ScenarioRecord proposal;
  proposal.scenario_id = "prop000001";
  proposal.image_id = records[0].image_id;
  proposal.text = "unrated";
  records.push_back(proposal);
  const auto data = prepare_data(records, data_config());
  EXPECT_EQ(data.groups.size(), 120u);
  EXPECT_EQ(data.split.train.size(), 90u);
  EXPECT_EQ(data.featurizer->dim(), 32u);
  EXPECT_NE(data.corpus_hash, prepare_data(corpus(), data_config()).corpus_hash);
}

TEST(Prepare, RejectsCorpusWithoutRatings) {
  ScenarioRecord r;
  r.scenario_id = "a";
  r.image_id = "i";
  EXPECT_THROW(prepare_data({r}, data_config()), ValidationError);
}

TEST(TrainEval, LossesShareTheSplit) {
  const auto data = prepare_data(corpus(), data_config());
  auto t = quick();
  const auto a = run_train(data, t);
  t.loss = LossType::kBpo;
  const auto b = run_train(data, t);
  EXPECT_NE(a.checkpoint.params, b.checkpoint.params);
  EXPECT_EQ(a.checkpoint.split_seed, b.checkpoint.split_seed);
  EXPECT_EQ(a.checkpoint.corpus_hash, data.corpus_hash);
  const auto ea = run_eval(a.checkpoint, data);
  const auto eb = run_eval(b.checkpoint, data);
  EXPECT_EQ(ea.report.n_groups, data.split.test.size());
  EXPECT_EQ(eb.report.n_groups, ea.report.n_groups);
  EXPECT_FALSE(ea.hash_mismatch);
}

TEST(TrainEval, HashMismatchWarns) {
  const auto data = prepare_data(corpus(), data_config());
  const auto run = run_train(data, quick());
  auto changed = corpus();
  changed[0].ratings[0].score = changed[0].ratings[0].score == 5 ? 4 : 5;
  const auto other = prepare_data(changed, data_config());
  const auto e = run_eval(run.checkpoint, other);
  EXPECT_TRUE(e.hash_mismatch);
  const auto j = eval_json(e);
  ASSERT_EQ(j["warnings"].size(), 1u);
  EXPECT_TRUE(j.contains("ndcg_at_5"));
}

TEST(TrainEval, FeatureDimMismatch) {
  const auto data = prepare_data(corpus(), data_config());
  const auto run = run_train(data, quick());
  auto d = data_config();
  d.feature_dim = 16;
  EXPECT_THROW(run_eval(run.checkpoint, prepare_data(corpus(), d)), DimensionError);
}

TEST(Ablate, CountsRowsAndMatchesPlainRun) {
  const auto data = prepare_data(corpus(), data_config());
  const auto rows = run_ablate(data, quick(), AblationAxis::kListSize, {1, 4}, {1, 2});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].value, 1.0);
  EXPECT_EQ(rows[1].seed, 2u);
  EXPECT_EQ(rows[2].value, 4.0);

  const auto f = run_ablate(data, quick(), AblationAxis::kFraction, {1.0}, {3});
  auto t = quick();
  t.seed = 3;
  const auto plain = run_eval(run_train(data, t).checkpoint, data);
  EXPECT_EQ(f[0].ndcg5, plain.report.ndcg_at_5);
  EXPECT_EQ(f[0].unsafe_rate, plain.report.unsafe_rate);

  EXPECT_THROW(run_ablate(data, quick(), AblationAxis::kListSize, {6}, {1}), ValidationError);
  EXPECT_THROW(run_ablate(data, quick(), AblationAxis::kFraction, {}, {1}), ValidationError);
}

TEST(Ablate, AxisNamesAndDefaults) {
  EXPECT_EQ(parse_ablation_axis("LIST_SIZE"), AblationAxis::kListSize);
  EXPECT_EQ(parse_ablation_axis("fraction"), AblationAxis::kFraction);
  EXPECT_THROW(parse_ablation_axis("depth"), ValidationError);
  EXPECT_EQ(default_ablation_values(AblationAxis::kListSize), (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_EQ(default_ablation_values(AblationAxis::kFraction),
            (std::vector<double>{0.1, 0.25, 0.5, 1.0}));
  EXPECT_EQ(default_ablation_seeds().size(), 5u);
}

TEST(Ablate, CsvFormat) {
  std::ostringstream out;
  write_ablation_csv(out, {{AblationAxis::kFraction, 0.25, 2, 0.5, 0.125}});
  EXPECT_EQ(out.str(), "axis,value,seed,ndcg5,unsafe_rate\nFRACTION,0.25,2,0.5,0.125\n");
}

TEST(AgreementReport, SchemaWithAndWithoutModel) {
  const auto data = prepare_data(corpus(), data_config());
  const auto plain = agreement_report(corpus());
  EXPECT_FALSE(plain.contains("model_agreement"));
  EXPECT_TRUE(plain["alpha"]["ordinal_ratings"].is_number());
  const auto run = run_train(data, quick());
  const auto with = agreement_report(corpus(), &run.checkpoint, &data);
  ASSERT_TRUE(with.contains("model_agreement"));
  EXPECT_EQ(with["model_agreement"]["groups"], data.split.test.size());
  std::vector<std::string> a, b;
  for (const auto& [k, _] : plain.items()) a.push_back(k);
  for (const auto& [k, _] : with.items()) {
    if (k != "model_agreement") b.push_back(k);
  }
  EXPECT_EQ(a, b);
  EXPECT_NE(format_agreement_report(with).find("Model vs consensus"), std::string::npos);
}

TEST(AgreementReport, UnanimousAndUndefined) {
  std::vector<ScenarioRecord> records;
  for (int k = 0; k < 4; ++k) {
    ScenarioRecord r;
    r.scenario_id = "s" + std::to_string(k);
    r.image_id = "i";
    r.ratings = {{"a", 1 + k}, {"b", 1 + k}};
    records.push_back(r);
  }
  const auto j = agreement_report(records);
  EXPECT_EQ(j["alpha"]["ordinal_ratings"], 1.0);
  EXPECT_TRUE(j["alpha"]["nominal_modality"].is_null());
  EXPECT_NE(format_agreement_report(j).find("undefined"), std::string::npos);
}

TEST(Manifest, Fields) {
  RunManifest m;
  m.command = "train";
  m.seeds = {7, 13};
  const auto j = to_json(m);
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"command", "config", "seeds", "inputs", "outputs",
                                            "wall_clock_seconds"}));
}

}  // namespace
}  // namespace listalign
