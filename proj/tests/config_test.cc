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

#include <gtest/gtest.h>

#include <map>

#include "listalign/errors.h"
#include "listalign/pipeline.h"

namespace listalign {
namespace {

const char* kSample = R"(# experiment
[synth]
n_groups = 500
noise_std = 0.25   # trailing comment
seed = 9

[train]
loss = "bpo"
lr = 1e-3
aux_mse_weight = 0.2

[ablate]
values = [1, 4, 5]

[data]
corpus = "path with # hash.jsonl"
)";

TEST(Config, ParsesSectionsCommentsQuotesArrays) {
  const auto c = Config::parse(std::string(kSample));
  EXPECT_EQ(c.get_uint("synth.n_groups"), 500u);
  EXPECT_EQ(c.get_double("synth.noise_std"), 0.25);
  EXPECT_EQ(c.get_string("train.loss"), "bpo");
  EXPECT_EQ(c.get_doubles("ablate.values"), (std::vector<double>{1, 4, 5}));
  EXPECT_EQ(c.get_string("data.corpus"), "path with # hash.jsonl");
  EXPECT_FALSE(c.has("train.epochs"));
  EXPECT_EQ(c.section_keys("train"), (std::vector<std::string>{"aux_mse_weight", "loss", "lr"}));
}

TEST(Config, ParseErrorsCarryLine) {
  try {
    Config::parse(std::string("[a]\nx = 1\nx = 2\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(Config::parse(std::string("[a]\njust words\n")), ParseError);
  EXPECT_THROW(Config::parse(std::string("[a\n")), ParseError);
}

TEST(Config, TypedGettersRejectBadValues) {
  auto c = Config::parse(std::string("[train]\nepochs = many\nflag = maybe\n"));
  EXPECT_THROW(c.get_int("train.epochs"), ValidationError);
  EXPECT_THROW(c.get_bool("train.flag"), ValidationError);
  c.set("train.flag", "true");
  EXPECT_EQ(c.get_bool("train.flag"), true);
  EXPECT_EQ(c.get_double("train.missing", 2.5), 2.5);
}

TEST(Config, EnvNamesAndOverrides) {
  EXPECT_EQ(Config::env_name("train.lr"), "MORALE_TRAIN_LR");
  EXPECT_EQ(Config::env_name("service.event_log"), "MORALE_SERVICE_EVENT_LOG");
  auto c = Config::parse(std::string(kSample));
  const std::map<std::string, std::string> env = {{"MORALE_TRAIN_LR", "0.01"},
                                                  {"MORALE_SYNTH_LIST_MAX", "3"}};
  c.apply_env([&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }, {"synth.list_max"});
  EXPECT_EQ(c.get_double("train.lr"), 0.01);
  EXPECT_EQ(c.get_uint("synth.list_max"), 3u);
  EXPECT_EQ(c.get_uint("synth.n_groups"), 500u);
}

TEST(Config, OverlaysTypedStructs) {
  const auto c = Config::parse(std::string(kSample));
  const auto s = synth_config_from(c);
  EXPECT_EQ(s.n_groups, 500u);
  EXPECT_EQ(s.seed, 9u);
  const auto t = train_config_from(c);
  EXPECT_EQ(t.loss, LossType::kBpo);
  EXPECT_EQ(t.lr, 1e-3);
  EXPECT_EQ(t.aux_mse_weight, 0.2);
  EXPECT_EQ(t.epochs, TrainConfig{}.epochs);
  const auto d = data_config_from(c);
  EXPECT_EQ(d.corpus, "path with # hash.jsonl");
}

TEST(Config, UnknownAndInvalidKeysRejected) {
  EXPECT_THROW(synth_config_from(Config::parse(std::string("[synth]\nbogus = 1\n"))),
               ValidationError);
  EXPECT_THROW(train_config_from(Config::parse(std::string("[train]\nloss = hinge\n"))),
               ValidationError);
  EXPECT_THROW(synth_config_from(Config::parse(std::string("[synth]\nnoise_std = -1\n"))),
               ValidationError);
}

TEST(Config, ResolvedConfigRoundTrips) {
  TrainConfig t;
  t.lr = 0.1 + 0.2;  // needs all 17 digits
  t.loss = LossType::kBce;
  t.seed = 123;
  const auto flat = to_config(t).to_json();
  EXPECT_TRUE(flat["train.lr"].is_number());
  EXPECT_TRUE(flat["train.loss"].is_string());
  const auto back = train_config_from(Config::from_json(nlohmann::ordered_json::parse(flat.dump())));
  EXPECT_EQ(back.lr, t.lr);
  EXPECT_EQ(back.loss, t.loss);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.effective_mse_weight(), t.effective_mse_weight());

  SynthConfig s;
  s.noise_std = 0.7;
  s.panel_per_list = false;
  const auto sback = synth_config_from(Config::from_json(to_config(s).to_json()));
  EXPECT_EQ(to_config(sback).to_json(), to_config(s).to_json());
}

TEST(Config, MergeOverrides) {
  auto a = Config::parse(std::string("[train]\nlr = 1\nepochs = 2\n"));
  const auto b = Config::parse(std::string("[train]\nlr = 3\n"));
  a.merge(b);
  EXPECT_EQ(a.get_double("train.lr"), 3.0);
  EXPECT_EQ(a.get_int("train.epochs"), 2);
}

}  // namespace
}  // namespace listalign
