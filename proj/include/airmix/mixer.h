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

#ifndef AIRMIX_MIXER_H_
#define AIRMIX_MIXER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "airmix/channel.h"
#include "airmix/rng.h"

namespace airmix::mixer {

// Length of one transmission slot in seconds.
inline constexpr double kDefaultSlotSeconds = 1e-3;

enum class Policy { kDirMix, kNonMix, kEqualMix };
enum class Assignment { kRandom, kMaxMin };

std::string PolicyName(Policy policy);
std::string AssignmentName(Assignment assignment);
absl::StatusOr<Policy> ParsePolicy(absl::string_view name);
absl::StatusOr<Assignment> ParseAssignment(absl::string_view name);

// Mixing ratios q_t over the scheduled workers (parallel arrays). `alpha` is
// zero for the deterministic baselines.
struct MixRatioVector {
  int64_t slot = 0;
  std::vector<int> workers;
  std::vector<double> ratios;
  std::vector<double> prior;
  double alpha = 0.0;

  int size() const { return static_cast<int>(workers.size()); }
  double MaxRatio() const;
  double MaxSquared() const;
};

// Draws q ~ Dir(alpha * prior). An empty prior means uniform. Gamma variates
// are drawn in log space so that tiny concentrations do not underflow.
absl::StatusOr<MixRatioVector> SampleMixRatios(std::span<const int> scheduled,
                                               double alpha,
                                               std::span<const double> prior,
                                               int64_t slot, Rng& rng);

// NonMix puts all mass on one uniformly chosen worker; EqualMix is uniform.
absl::StatusOr<MixRatioVector> BaselineRatios(std::span<const int> scheduled,
                                              Policy policy, int64_t slot,
                                              Rng& rng);

// min_i |h_i|^2 / q_i^2 over workers with q_i > 0.
double MaxMinObjective(std::span<const double> ratios,
                       std::span<const double> magnitudes);

// Permutes ratio values across workers. kRandom uses a uniform permutation;
// kMaxMin pairs descending ratios with descending channel magnitudes, which
// maximizes MaxMinObjective.
absl::StatusOr<MixRatioVector> AssignRatios(
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    Assignment strategy, Rng& rng);

// beta = p_max * min_i |h_i|^2 / q_i^2; zero-ratio workers are skipped.
absl::StatusOr<double> MaxPowerBeta(const MixRatioVector& ratios,
                                    const channel::ChannelRealization& channel,
                                    double p_max_watts);

struct PowerAllocation {
  int64_t slot = 0;
  double beta = 0.0;
  std::vector<double> powers;  // watts, parallel to the ratio workers
  Policy policy = Policy::kDirMix;

  double TotalPower() const;
  double MaxPower() const;
};

// Fractional channel inversion P_i = beta * q_i^2 / |h_i|^2.
absl::StatusOr<PowerAllocation> AllocatePower(
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    double beta, Policy policy);

// Immutable per-worker private samples. Inputs must lie in [0, 1] and labels
// must be one-hot; both are checked at construction.
class SampleBank {
 public:
  static absl::StatusOr<SampleBank> Create(
      std::vector<std::vector<double>> inputs,
      std::vector<std::vector<double>> labels);

  int size() const { return static_cast<int>(inputs_.size()); }
  int input_dim() const { return input_dim_; }
  int label_dim() const { return label_dim_; }
  const std::vector<double>& input(int worker) const { return inputs_[worker]; }
  const std::vector<double>& label(int worker) const { return labels_[worker]; }

 private:
  SampleBank() = default;

  std::vector<std::vector<double>> inputs_;
  std::vector<std::vector<double>> labels_;
  int input_dim_ = 0;
  int label_dim_ = 0;
};

// One normalized mixed-up sample as seen by the server, with bookkeeping.
struct MixedSample {
  int64_t slot = 0;
  std::vector<double> input_mix;
  std::vector<double> label_mix;
  double beta = 0.0;
  double b_t = 0.0;
  double energy_joules = 0.0;
  double max_q_sq = 0.0;
};

struct MixedDataset {
  int input_dim = 0;
  int label_dim = 0;
  std::vector<MixedSample> rounds;

  double TotalEnergy() const;
};

// Superposes the scheduled workers' analog symbols over the channel, adds the
// real part of complex AWGN, and normalizes by b_t = sqrt(beta).
absl::StatusOr<MixedSample> TransmitRound(
    const SampleBank& bank, const PowerAllocation& alloc,
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    const channel::ChannelConfig& noise_cfg, Rng& rng,
    double slot_seconds = kDefaultSlotSeconds);

}  // namespace airmix::mixer

#endif  // AIRMIX_MIXER_H_
