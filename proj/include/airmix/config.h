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

#ifndef AIRMIX_CONFIG_H_
#define AIRMIX_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/channel.h"
#include "airmix/learner.h"
#include "airmix/mixer.h"
#include "json.hpp"

namespace airmix {

// How the power scaling factor is chosen each slot.
enum class BetaMode {
  kMaxPower,  // largest beta allowed by the per-worker power cap
  kPrivacy,   // closed-form privacy beta, capped at the max-power value
};

struct DatasetSource {
  enum class Kind { kIris, kSynthetic };
  Kind kind = Kind::kIris;
  std::string path = "data/iris.csv";
  int pool_size = 100;  // rows of the train pool workers draw from
  int test_size = 50;
  // Synthetic blobs only.
  int synthetic_rows = 150;
  int synthetic_input_dim = 4;
  int synthetic_label_dim = 3;
  double synthetic_separation = 1.0;
};

// Optional per-stream seed overrides. When unset, each stream is derived
// from the master seed.
struct SeedOverrides {
  std::optional<uint64_t> placement;
  std::optional<uint64_t> scheduling;
  std::optional<uint64_t> mixing;
  std::optional<uint64_t> assignment;
  std::optional<uint64_t> fading;
  std::optional<uint64_t> noise;
  std::optional<uint64_t> data;
  std::optional<uint64_t> training;
};

struct ExperimentConfig {
  int n_workers = 2000;
  double field_side_m = 500.0;
  channel::ChannelConfig channel;
  double p_max_dbm = 23.0;

  mixer::Policy policy = mixer::Policy::kDirMix;
  double alpha = 1e5;
  mixer::Assignment assignment = mixer::Assignment::kRandom;
  int schedule_size = 8;
  int64_t slots = 1000;
  double slot_seconds = mixer::kDefaultSlotSeconds;

  BetaMode mode = BetaMode::kPrivacy;
  double epsilon = 5.0;
  double delta = 0.01;
  int max_order = 256;

  learner::TrainConfig train;
  std::vector<int> hidden_layers = {32, 16};
  bool train_model = true;

  DatasetSource dataset;
  uint64_t seed = 1;
  SeedOverrides seeds;
  int repetitions = 3;

  double PMaxWatts() const;
  double SamplingRatio() const;
  absl::Status Validate() const;
};

std::string BetaModeName(BetaMode mode);

// JSON (de)serialization. Missing keys keep their defaults; unknown keys are
// rejected so that typos surface.
absl::StatusOr<ExperimentConfig> ConfigFromJson(const nlohmann::json& j);
nlohmann::json ConfigToJson(const ExperimentConfig& cfg);

// Reads a config file. A relative dataset path is resolved against the
// config file's directory when that file exists.
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);

}  // namespace airmix

#endif  // AIRMIX_CONFIG_H_
