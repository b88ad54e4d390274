// Copyright 2026 The AirMix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "airmix/config.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "gtest/gtest.h"

namespace airmix {
namespace {

using nlohmann::json;

TEST(ConfigTest, DefaultsMatchReferenceScenario) {
  ExperimentConfig cfg;
  EXPECT_EQ(cfg.n_workers, 2000);
  EXPECT_EQ(cfg.schedule_size, 8);
  EXPECT_EQ(cfg.slots, 1000);
  EXPECT_DOUBLE_EQ(cfg.p_max_dbm, 23.0);
  EXPECT_DOUBLE_EQ(cfg.channel.unit_pathloss_db, -32.0);
  EXPECT_DOUBLE_EQ(cfg.channel.noise_power_dbm, -114.0);
  EXPECT_DOUBLE_EQ(cfg.delta, 0.01);
  EXPECT_NEAR(cfg.PMaxWatts(), 0.19953, 1e-5);
  EXPECT_DOUBLE_EQ(cfg.SamplingRatio(), 8.0 / 2000.0);
  EXPECT_TRUE(cfg.Validate().ok());
}

TEST(ConfigTest, ParsesNestedKeys) {
  const json j = json::parse(R"({
    "n_workers": 50, "schedule_size": 4, "slots": 20, "policy": "EqualMix",
    "assignment": "MaxMin", "mode": "max_power",
    "channel": {"fading": "rician", "rician_k": 3.0, "noise_power_dbm": -100},
    "train": {"epochs": 7, "batch_size": 16},
    "dataset": {"kind": "synthetic", "rows": 90, "input_dim": 2, "label_dim": 3},
    "hidden_layers": [8], "seeds": {"noise": 99}
  })");
  auto cfg = ConfigFromJson(j);
  ASSERT_TRUE(cfg.ok()) << cfg.status();
  EXPECT_EQ(cfg->n_workers, 50);
  EXPECT_EQ(cfg->policy, mixer::Policy::kEqualMix);
  EXPECT_EQ(cfg->assignment, mixer::Assignment::kMaxMin);
  EXPECT_EQ(cfg->mode, BetaMode::kMaxPower);
  EXPECT_EQ(cfg->channel.fading.kind, channel::FadingKind::kRician);
  EXPECT_DOUBLE_EQ(cfg->channel.fading.rician_k, 3.0);
  EXPECT_DOUBLE_EQ(cfg->channel.noise_power_dbm, -100.0);
  EXPECT_EQ(cfg->train.epochs, 7);
  EXPECT_EQ(cfg->train.batch_size, 16);
  EXPECT_EQ(cfg->dataset.kind, DatasetSource::Kind::kSynthetic);
  EXPECT_EQ(cfg->dataset.synthetic_rows, 90);
  EXPECT_EQ(cfg->hidden_layers, std::vector<int>{8});
  ASSERT_TRUE(cfg->seeds.noise.has_value());
  EXPECT_EQ(*cfg->seeds.noise, 99u);
  EXPECT_FALSE(cfg->seeds.fading.has_value());
}

TEST(ConfigTest, RejectsUnknownKeys) {
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"n_worker": 5})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"channel": {"k": 1}})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"train": {"lr": 1}})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"seeds": {"x": 1}})")).ok());
}

TEST(ConfigTest, RejectsBadValues) {
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"policy": "Foo"})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"mode": "loud"})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"schedule_size": 0})")).ok());
  EXPECT_FALSE(
      ConfigFromJson(json::parse(R"({"n_workers": 3, "schedule_size": 4})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"delta": 1.5})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"epsilon": 0})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"alpha": -1})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"max_order": 300})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"slots": "many"})")).ok());
  EXPECT_FALSE(ConfigFromJson(json::parse(R"({"slots": -1})")).ok());
}

TEST(ConfigTest, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.policy = mixer::Policy::kNonMix;
  cfg.channel.fading = {channel::FadingKind::kRayleigh, 0.0};
  cfg.seeds.training = 5;
  cfg.epsilon = 1.25;
  const json j = ConfigToJson(cfg);
  auto back = ConfigFromJson(j);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(ConfigToJson(*back), j);
}

TEST(ConfigTest, LoadResolvesDatasetBesideConfig) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "airmix_config_test";
  fs::create_directories(dir);
  { std::ofstream(dir / "iris.csv") << "x\n"; }
  { std::ofstream(dir / "c.json") << R"({"dataset": {"path": "iris.csv"}})"; }
  auto cfg = LoadConfig((dir / "c.json").string());
  ASSERT_TRUE(cfg.ok()) << cfg.status();
  EXPECT_EQ(cfg->dataset.path, (dir / "iris.csv").string());
  { std::ofstream(dir / "bad.json") << "{not json"; }
  EXPECT_FALSE(LoadConfig((dir / "bad.json").string()).ok());
  EXPECT_FALSE(LoadConfig((dir / "missing.json").string()).ok());
  fs::remove_all(dir);
}

}  // namespace
}  // namespace airmix
