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

#ifndef AIRMIX_HARNESS_H_
#define AIRMIX_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/config.h"
#include "airmix/learner.h"
#include "airmix/mixer.h"
#include "airmix/privacy.h"
#include "airmix/rng.h"
#include "json.hpp"

namespace airmix {

// Seed of one independent stream for one repetition. A per-stream override
// replaces the master seed for that stream only.
uint64_t StreamSeed(const ExperimentConfig& cfg, StreamTag tag, int repetition);

struct PrivacyAudit {
  double tight_epsilon = 0.0;
  int order = 2;
  double loose_epsilon = 0.0;
  bool fell_back = false;
};

// Post-hoc accounting from the realized per-slot max q^2 and beta of a round
// log. `budget.slots` must equal the number of logged rounds and the budget
// dimensions must match the log.
absl::StatusOr<PrivacyAudit> AuditPrivacy(const mixer::MixedDataset& log,
                                          const privacy::PrivacyBudget& budget,
                                          int max_order = privacy::kMaxOrder);

// The accounting budget implied by a config and a released slot count.
privacy::PrivacyBudget BudgetFor(const ExperimentConfig& cfg, int input_dim,
                                 int label_dim, int64_t slots);

struct RepetitionResult {
  int repetition = 0;
  double accuracy = 0.0;
  double energy_j = 0.0;           // summed while streaming
  double energy_from_log_j = 0.0;  // re-read from the serialized round log
  // Realized privacy; +inf when the channel is noiseless.
  double tight_epsilon = 0.0;
  int tight_order = 2;
  double loose_epsilon = 0.0;
  double beta_mean = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  int64_t released_slots = 0;
  int64_t silent_slots = 0;
  // Slots where the max-power cap was below the privacy beta.
  int64_t power_limited_slots = 0;
  // No sample was released, so the model was never trained.
  bool untrained = false;
  std::vector<double> final_loss;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<RepetitionResult> repetitions;
  double wall_clock_s = 0.0;

  double MeanAccuracy() const;
  double StdAccuracy() const;  // population standard deviation
  double MeanEnergy() const;
  double MeanBeta() const;
  bool PowerLimited() const;
  bool Untrained() const;
};

struct RunOptions {
  // When non-empty, the round logs, model checkpoints and summary JSON are
  // written here.
  std::string output_dir;
};

// Per repetition: schedule, probe the channel, draw and assign mixing ratios,
// pick beta, allocate power, transmit; then train, evaluate, and audit.
absl::StatusOr<RunReport> RunExperiment(const ExperimentConfig& cfg,
                                        const RunOptions& options = {});

// One repetition with the released samples exposed, for inspection.
struct RepetitionTrace {
  RepetitionResult result;
  mixer::MixedDataset rounds;
  learner::ModelState model;  // trained, or freshly initialized when untrained
};
absl::StatusOr<RepetitionTrace> RunRepetition(const ExperimentConfig& cfg,
                                              int repetition);

nlohmann::json ReportToJson(const RunReport& report);

// Cartesian grid over a base config. An unset epsilon entry means max-power
// mode. Empty axes keep the base value.
struct SweepGrid {
  ExperimentConfig base;
  std::vector<std::optional<double>> epsilons;
  std::vector<double> deltas;
  std::vector<double> alphas;
  std::vector<int> schedule_sizes;
  std::vector<mixer::Policy> policies;
  std::vector<mixer::Assignment> assignments;
  int parallelism = 0;  // 0 = hardware concurrency

  // Cells in deterministic order: epsilon, delta, alpha, |N_t|, policy,
  // assignment, last axis fastest.
  std::vector<ExperimentConfig> Cells() const;
};

absl::StatusOr<SweepGrid> SweepGridFromJson(const nlohmann::json& j);
absl::StatusOr<SweepGrid> LoadSweepGrid(const std::string& path);

struct SweepRow {
  ExperimentConfig config;
  absl::StatusOr<RunReport> report;
};

// Runs every cell; a failing cell is recorded and the sweep continues.
std::vector<SweepRow> Sweep(const SweepGrid& grid);

// Columns: epsilon,delta,alpha,schedule_size,policy,assignment,
// mean_accuracy,std_accuracy,mean_energy_j,status.
void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace airmix

#endif  // AIRMIX_HARNESS_H_
