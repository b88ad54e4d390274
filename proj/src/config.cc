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

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace airmix {
namespace {

using nlohmann::json;

absl::Status CheckKeys(const json& j, absl::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(where, " must be an object"));
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key '", key, "' in ", where));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

absl::StatusOr<channel::Fading> ParseFading(const json& c) {
  channel::Fading fading;
  const std::string kind = c.value("fading", std::string("none"));
  if (kind == "none") {
    fading.kind = channel::FadingKind::kNone;
  } else if (kind == "rayleigh") {
    fading.kind = channel::FadingKind::kRayleigh;
  } else if (kind == "rician") {
    fading.kind = channel::FadingKind::kRician;
    fading.rician_k = c.value("rician_k", 0.0);
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown fading: ", kind));
  }
  return fading;
}

std::string FadingKey(const channel::Fading& f) {
  switch (f.kind) {
    case channel::FadingKind::kNone:
      return "none";
    case channel::FadingKind::kRician:
      return "rician";
    case channel::FadingKind::kRayleigh:
      return "rayleigh";
  }
  return "none";
}

}  // namespace

std::string BetaModeName(BetaMode mode) {
  return mode == BetaMode::kPrivacy ? "privacy" : "max_power";
}

double ExperimentConfig::PMaxWatts() const {
  return channel::DbmToWatts(p_max_dbm);
}

double ExperimentConfig::SamplingRatio() const {
  return static_cast<double>(schedule_size) / static_cast<double>(n_workers);
}

absl::Status ExperimentConfig::Validate() const {
  if (n_workers < 1) return absl::InvalidArgumentError("n_workers must be >= 1");
  if (!(field_side_m > 0.0)) {
    return absl::InvalidArgumentError("field side must be positive");
  }
  if (schedule_size < 1 || schedule_size > n_workers) {
    return absl::InvalidArgumentError("schedule size must lie in [1, N]");
  }
  if (slots < 0) return absl::InvalidArgumentError("slots must be >= 0");
  if (!(slot_seconds > 0.0)) {
    return absl::InvalidArgumentError("slot length must be positive");
  }
  if (policy == mixer::Policy::kDirMix && !(alpha > 0.0)) {
    return absl::InvalidArgumentError("alpha must be positive");
  }
  if (mode == BetaMode::kPrivacy) {
    if (!(epsilon > 0.0)) return absl::InvalidArgumentError("epsilon must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (max_order < 2 || max_order > 256) {
    return absl::InvalidArgumentError("max_order must lie in [2, 256]");
  }
  if (repetitions < 1) {
    return absl::InvalidArgumentError("repetitions must be >= 1");
  }
  for (int h : hidden_layers) {
    if (h < 1) return absl::InvalidArgumentError("hidden sizes must be >= 1");
  }
  if (dataset.pool_size < 1 || dataset.test_size < 1) {
    return absl::InvalidArgumentError("pool and test sizes must be >= 1");
  }
  if (auto s = channel.Validate(); !s.ok()) return s;
  return train.Validate();
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(const json& j) {
  ExperimentConfig cfg;
  try {
    if (auto s = CheckKeys(
            j, "config",
            {"n_workers", "field_side_m", "channel", "p_max_dbm", "policy",
             "alpha", "assignment", "schedule_size", "slots", "slot_seconds",
             "mode", "epsilon", "delta", "max_order", "train", "hidden_layers",
             "train_model", "dataset", "seed", "seeds", "repetitions"});
        !s.ok()) {
      return s;
    }
    Read(j, "n_workers", cfg.n_workers);
    Read(j, "field_side_m", cfg.field_side_m);
    Read(j, "p_max_dbm", cfg.p_max_dbm);
    Read(j, "alpha", cfg.alpha);
    Read(j, "schedule_size", cfg.schedule_size);
    Read(j, "slots", cfg.slots);
    Read(j, "slot_seconds", cfg.slot_seconds);
    Read(j, "epsilon", cfg.epsilon);
    Read(j, "delta", cfg.delta);
    Read(j, "max_order", cfg.max_order);
    Read(j, "hidden_layers", cfg.hidden_layers);
    Read(j, "train_model", cfg.train_model);
    Read(j, "seed", cfg.seed);
    Read(j, "repetitions", cfg.repetitions);
    if (j.contains("policy")) {
      auto p = mixer::ParsePolicy(j.at("policy").get<std::string>());
      if (!p.ok()) return p.status();
      cfg.policy = *p;
    }
    if (j.contains("assignment")) {
      auto a = mixer::ParseAssignment(j.at("assignment").get<std::string>());
      if (!a.ok()) return a.status();
      cfg.assignment = *a;
    }
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "privacy") {
        cfg.mode = BetaMode::kPrivacy;
      } else if (mode == "max_power") {
        cfg.mode = BetaMode::kMaxPower;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown mode: ", mode));
      }
    }
    if (j.contains("channel")) {
      const json& c = j.at("channel");
      if (auto s = CheckKeys(c, "channel",
                             {"unit_pathloss_db", "pathloss_exponent", "fading",
                              "rician_k", "noise_power_dbm"});
          !s.ok()) {
        return s;
      }
      Read(c, "unit_pathloss_db", cfg.channel.unit_pathloss_db);
      Read(c, "pathloss_exponent", cfg.channel.pathloss_exponent);
      Read(c, "noise_power_dbm", cfg.channel.noise_power_dbm);
      auto fading = ParseFading(c);
      if (!fading.ok()) return fading.status();
      cfg.channel.fading = *fading;
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      if (auto s = CheckKeys(t, "train",
                             {"learning_rate", "adam_beta1", "adam_beta2",
                              "adam_epsilon", "batch_size", "epochs"});
          !s.ok()) {
        return s;
      }
      Read(t, "learning_rate", cfg.train.learning_rate);
      Read(t, "adam_beta1", cfg.train.adam_beta1);
      Read(t, "adam_beta2", cfg.train.adam_beta2);
      Read(t, "adam_epsilon", cfg.train.adam_epsilon);
      Read(t, "batch_size", cfg.train.batch_size);
      Read(t, "epochs", cfg.train.epochs);
    }
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      if (auto s = CheckKeys(d, "dataset",
                             {"kind", "path", "pool_size", "test_size", "rows",
                              "input_dim", "label_dim", "separation"});
          !s.ok()) {
        return s;
      }
      const auto kind = d.value("kind", std::string("iris"));
      if (kind == "iris") {
        cfg.dataset.kind = DatasetSource::Kind::kIris;
      } else if (kind == "synthetic") {
        cfg.dataset.kind = DatasetSource::Kind::kSynthetic;
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown dataset: ", kind));
      }
      Read(d, "path", cfg.dataset.path);
      Read(d, "pool_size", cfg.dataset.pool_size);
      Read(d, "test_size", cfg.dataset.test_size);
      Read(d, "rows", cfg.dataset.synthetic_rows);
      Read(d, "input_dim", cfg.dataset.synthetic_input_dim);
      Read(d, "label_dim", cfg.dataset.synthetic_label_dim);
      Read(d, "separation", cfg.dataset.synthetic_separation);
    }
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      if (auto st = CheckKeys(s, "seeds",
                              {"placement", "scheduling", "mixing", "assignment",
                               "fading", "noise", "data", "training"});
          !st.ok()) {
        return st;
      }
      auto opt = [&s](const char* key, std::optional<uint64_t>& out) {
        if (s.contains(key)) out = s.at(key).get<uint64_t>();
      };
      opt("placement", cfg.seeds.placement);
      opt("scheduling", cfg.seeds.scheduling);
      opt("mixing", cfg.seeds.mixing);
      opt("assignment", cfg.seeds.assignment);
      opt("fading", cfg.seeds.fading);
      opt("noise", cfg.seeds.noise);
      opt("data", cfg.seeds.data);
      opt("training", cfg.seeds.training);
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad config: ", e.what()));
  }
  if (auto s = cfg.Validate(); !s.ok()) return s;
  return cfg;
}

json ConfigToJson(const ExperimentConfig& cfg) {
  json j;
  j["n_workers"] = cfg.n_workers;
  j["field_side_m"] = cfg.field_side_m;
  j["channel"] = {{"unit_pathloss_db", cfg.channel.unit_pathloss_db},
                  {"pathloss_exponent", cfg.channel.pathloss_exponent},
                  {"fading", FadingKey(cfg.channel.fading)},
                  {"rician_k", cfg.channel.fading.rician_k},
                  {"noise_power_dbm", cfg.channel.noise_power_dbm}};
  j["p_max_dbm"] = cfg.p_max_dbm;
  j["policy"] = mixer::PolicyName(cfg.policy);
  j["alpha"] = cfg.alpha;
  j["assignment"] = mixer::AssignmentName(cfg.assignment);
  j["schedule_size"] = cfg.schedule_size;
  j["slots"] = cfg.slots;
  j["slot_seconds"] = cfg.slot_seconds;
  j["mode"] = BetaModeName(cfg.mode);
  j["epsilon"] = cfg.epsilon;
  j["delta"] = cfg.delta;
  j["max_order"] = cfg.max_order;
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"adam_beta1", cfg.train.adam_beta1},
                {"adam_beta2", cfg.train.adam_beta2},
                {"adam_epsilon", cfg.train.adam_epsilon},
                {"batch_size", cfg.train.batch_size},
                {"epochs", cfg.train.epochs}};
  j["hidden_layers"] = cfg.hidden_layers;
  j["train_model"] = cfg.train_model;
  j["dataset"] = {
      {"kind", cfg.dataset.kind == DatasetSource::Kind::kIris ? "iris"
                                                              : "synthetic"},
      {"path", cfg.dataset.path},
      {"pool_size", cfg.dataset.pool_size},
      {"test_size", cfg.dataset.test_size},
      {"rows", cfg.dataset.synthetic_rows},
      {"input_dim", cfg.dataset.synthetic_input_dim},
      {"label_dim", cfg.dataset.synthetic_label_dim},
      {"separation", cfg.dataset.synthetic_separation}};
  j["seed"] = cfg.seed;
  json seeds = json::object();
  auto put = [&seeds](const char* key, const std::optional<uint64_t>& v) {
    if (v) seeds[key] = *v;
  };
  put("placement", cfg.seeds.placement);
  put("scheduling", cfg.seeds.scheduling);
  put("mixing", cfg.seeds.mixing);
  put("assignment", cfg.seeds.assignment);
  put("fading", cfg.seeds.fading);
  put("noise", cfg.seeds.noise);
  put("data", cfg.seeds.data);
  put("training", cfg.seeds.training);
  j["seeds"] = seeds;
  j["repetitions"] = cfg.repetitions;
  return j;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot parse ", path, ": ", e.what()));
  }
  auto cfg = ConfigFromJson(j);
  if (!cfg.ok()) return cfg.status();
  namespace fs = std::filesystem;
  const fs::path data_path(cfg->dataset.path);
  if (data_path.is_relative()) {
    const fs::path beside = fs::path(path).parent_path() / data_path;
    if (fs::exists(beside)) cfg->dataset.path = beside.string();
  }
  return cfg;
}

}  // namespace airmix
