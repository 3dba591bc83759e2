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
#include "listalign/checkpoint.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "listalign/errors.h"

namespace listalign {
namespace {

Checkpoint sample() {
  Checkpoint c;
  c.config.hidden = 4;
  c.config.loss = LossType::kBpo;
  c.feature_dim = 3;
  c.params = ScorerParams::initialize(6, 4, 5, 2.5);
  c.corpus_hash = "00ff00ff00ff00ff";
  c.split_ratio = 0.8;
  c.split_seed = 21;
  return c;
}

std::string tmp(const std::string& name) {
  std::filesystem::create_directories(LISTALIGN_TEST_TMP);
  return std::string(LISTALIGN_TEST_TMP) + "/" + name;
}

TEST(Checkpoint, JsonRoundTripIsExact) {
  const auto c = sample();
  const auto j = to_json(c);
  EXPECT_EQ(j["format"], kCheckpointFormat);
  EXPECT_EQ(j["version"], kCheckpointVersion);
  const auto back = checkpoint_from_json(nlohmann::ordered_json::parse(j.dump()));
  EXPECT_EQ(back.params, c.params);
  EXPECT_EQ(back.feature_dim, 3u);
  EXPECT_EQ(back.corpus_hash, c.corpus_hash);
  EXPECT_EQ(back.split_seed, 21u);
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = tmp("ckpt.json");
  save_checkpoint(sample(), path);
  EXPECT_EQ(load_checkpoint(path).params, sample().params);
}

TEST(Checkpoint, RejectsCorruption) {
  auto j = to_json(sample());
  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(bad), ValidationError);
  bad = j;
  bad["format"] = "other";
  EXPECT_THROW(checkpoint_from_json(bad), ValidationError);
  bad = j;
  bad["params"]["w2"].erase(0);
  EXPECT_THROW(checkpoint_from_json(bad), DimensionError);
  bad = j;
  bad["feature_dim"] = 4;
  EXPECT_THROW(checkpoint_from_json(bad), Error);
  bad = j;
  bad.erase("params");
  EXPECT_THROW(checkpoint_from_json(bad), Error);
}

TEST(Checkpoint, FileErrors) {
  try {
    load_checkpoint(tmp("missing.json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  const auto path = tmp("garbage.json");
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_checkpoint(path), ParseError);
}

}  // namespace
}  // namespace listalign
