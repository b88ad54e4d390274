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

#include "airmix/mixer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"

namespace airmix::mixer {
namespace {

constexpr double kSimplexTolerance = 1e-9;

std::vector<double> UniformPrior(size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

// log of a Gamma(shape, 1) variate. For shape < 1 uses
// Gamma(a) = Gamma(a + 1) * U^(1/a), which keeps tiny shapes representable.
double LogGamma(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double g = gamma(rng);
  const double u = 1.0 - unit(rng);  // (0, 1]
  return std::log(g) + std::log(u) / shape;
}

absl::Status CheckSameWorkers(const MixRatioVector& ratios,
                              const channel::ChannelRealization& channel) {
  if (ratios.workers != channel.workers) {
    return absl::InvalidArgumentError(
        "mixing ratios and channel realization cover different workers");
  }
  return absl::OkStatus();
}

}  // namespace

std::string PolicyName(Policy policy) {
  switch (policy) {
    case Policy::kDirMix:
      return "dirmix";
    case Policy::kNonMix:
      return "nonmix";
    case Policy::kEqualMix:
      return "equalmix";
  }
  return "unknown";
}

std::string AssignmentName(Assignment assignment) {
  return assignment == Assignment::kRandom ? "random" : "maxmin";
}

absl::StatusOr<Policy> ParsePolicy(absl::string_view raw) {
  const std::string name = absl::AsciiStrToLower(raw);
  if (name == "dirmix") return Policy::kDirMix;
  if (name == "nonmix") return Policy::kNonMix;
  if (name == "equalmix") return Policy::kEqualMix;
  return absl::InvalidArgumentError(absl::StrCat("unknown policy: ", raw));
}

absl::StatusOr<Assignment> ParseAssignment(absl::string_view raw) {
  const std::string name = absl::AsciiStrToLower(raw);
  if (name == "random") return Assignment::kRandom;
  if (name == "maxmin") return Assignment::kMaxMin;
  return absl::InvalidArgumentError(absl::StrCat("unknown assignment: ", raw));
}

double MixRatioVector::MaxRatio() const {
  return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
}

double MixRatioVector::MaxSquared() const {
  const double m = MaxRatio();
  return m * m;
}

absl::StatusOr<MixRatioVector> SampleMixRatios(std::span<const int> scheduled,
                                               double alpha,
                                               std::span<const double> prior,
                                               int64_t slot, Rng& rng) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError("Dirichlet alpha must be positive");
  }
  if (scheduled.empty()) {
    return absl::InvalidArgumentError("no scheduled workers");
  }
  MixRatioVector out;
  out.slot = slot;
  out.alpha = alpha;
  out.workers.assign(scheduled.begin(), scheduled.end());
  if (prior.empty()) {
    out.prior = UniformPrior(scheduled.size());
  } else {
    if (prior.size() != scheduled.size()) {
      return absl::InvalidArgumentError("prior size differs from schedule");
    }
    double sum = 0.0;
    for (double p : prior) {
      if (!(p > 0.0)) {
        return absl::InvalidArgumentError("prior entries must be positive");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      return absl::InvalidArgumentError("prior must sum to one");
    }
    out.prior.assign(prior.begin(), prior.end());
  }

  const size_t n = scheduled.size();
  if (n == 1) {
    out.ratios = {1.0};
    return out;
  }
  std::vector<double> log_g(n);
  for (size_t i = 0; i < n; ++i) log_g[i] = LogGamma(alpha * out.prior[i], rng);
  const double top = *std::max_element(log_g.begin(), log_g.end());
  out.ratios.resize(n);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    out.ratios[i] = std::exp(log_g[i] - top);
    total += out.ratios[i];
  }
  for (double& q : out.ratios) q /= total;
  return out;
}

absl::StatusOr<MixRatioVector> BaselineRatios(std::span<const int> scheduled,
                                              Policy policy, int64_t slot,
                                              Rng& rng) {
  if (scheduled.empty()) {
    return absl::InvalidArgumentError("no scheduled workers");
  }
  const size_t n = scheduled.size();
  MixRatioVector out;
  out.slot = slot;
  out.workers.assign(scheduled.begin(), scheduled.end());
  out.prior = UniformPrior(n);
  switch (policy) {
    case Policy::kNonMix: {
      out.ratios.assign(n, 0.0);
      std::uniform_int_distribution<size_t> pick(0, n - 1);
      out.ratios[pick(rng)] = 1.0;
      break;
    }
    case Policy::kEqualMix:
      out.ratios = UniformPrior(n);
      break;
    case Policy::kDirMix:
      return absl::InvalidArgumentError(
          "DirMix ratios come from SampleMixRatios");
  }
  return out;
}

double MaxMinObjective(std::span<const double> ratios,
                       std::span<const double> magnitudes) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] <= 0.0) continue;
    const double h = magnitudes[i];
    best = std::min(best, (h * h) / (ratios[i] * ratios[i]));
  }
  return best;
}

absl::StatusOr<MixRatioVector> AssignRatios(
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    Assignment strategy, Rng& rng) {
  if (auto s = CheckSameWorkers(ratios, channel); !s.ok()) return s;
  MixRatioVector out = ratios;
  const size_t n = ratios.ratios.size();
  switch (strategy) {
    case Assignment::kRandom:
      std::shuffle(out.ratios.begin(), out.ratios.end(), rng);
      break;
    case Assignment::kMaxMin: {
      std::vector<double> sorted_q = ratios.ratios;
      std::sort(sorted_q.begin(), sorted_q.end(), std::greater<>());
      std::vector<size_t> by_gain(n);
      std::iota(by_gain.begin(), by_gain.end(), 0);
      std::stable_sort(by_gain.begin(), by_gain.end(), [&](size_t a, size_t b) {
        return channel.magnitudes[a] > channel.magnitudes[b];
      });
      for (size_t rank = 0; rank < n; ++rank) {
        out.ratios[by_gain[rank]] = sorted_q[rank];
      }
      break;
    }
  }
  return out;
}

absl::StatusOr<double> MaxPowerBeta(const MixRatioVector& ratios,
                                    const channel::ChannelRealization& channel,
                                    double p_max_watts) {
  if (auto s = CheckSameWorkers(ratios, channel); !s.ok()) return s;
  if (!(p_max_watts > 0.0)) {
    return absl::InvalidArgumentError("maximum transmit power must be positive");
  }
  const double objective = MaxMinObjective(ratios.ratios, channel.magnitudes);
  if (!std::isfinite(objective)) {
    return absl::InvalidArgumentError("all mixing ratios are zero");
  }
  return p_max_watts * objective;
}

double PowerAllocation::TotalPower() const {
  return std::accumulate(powers.begin(), powers.end(), 0.0);
}

double PowerAllocation::MaxPower() const {
  return powers.empty() ? 0.0 : *std::max_element(powers.begin(), powers.end());
}

absl::StatusOr<PowerAllocation> AllocatePower(
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    double beta, Policy policy) {
  if (auto s = CheckSameWorkers(ratios, channel); !s.ok()) return s;
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    return absl::InvalidArgumentError("beta must be finite and non-negative");
  }
  PowerAllocation alloc;
  alloc.slot = ratios.slot;
  alloc.beta = beta;
  alloc.policy = policy;
  alloc.powers.resize(ratios.ratios.size());
  for (size_t i = 0; i < ratios.ratios.size(); ++i) {
    const double q = ratios.ratios[i];
    const double h = channel.magnitudes[i];
    alloc.powers[i] = q == 0.0 ? 0.0 : beta * q * q / (h * h);
  }
  return alloc;
}

absl::StatusOr<SampleBank> SampleBank::Create(
    std::vector<std::vector<double>> inputs,
    std::vector<std::vector<double>> labels) {
  if (inputs.empty()) {
    return absl::InvalidArgumentError("sample bank is empty");
  }
  if (inputs.size() != labels.size()) {
    return absl::InvalidArgumentError("input and label counts differ");
  }
  SampleBank bank;
  bank.input_dim_ = static_cast<int>(inputs.front().size());
  bank.label_dim_ = static_cast<int>(labels.front().size());
  if (bank.input_dim_ < 1 || bank.label_dim_ < 1) {
    return absl::InvalidArgumentError("sample dimensions must be >= 1");
  }
  for (size_t w = 0; w < inputs.size(); ++w) {
    if (static_cast<int>(inputs[w].size()) != bank.input_dim_ ||
        static_cast<int>(labels[w].size()) != bank.label_dim_) {
      return absl::InvalidArgumentError(
          absl::StrCat("worker ", w, " has inconsistent dimensions"));
    }
    for (double v : inputs[w]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("worker ", w, " input outside [0, 1]"));
      }
    }
    int ones = 0;
    for (double v : labels[w]) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("worker ", w, " label is not one-hot"));
    }
  }
  bank.inputs_ = std::move(inputs);
  bank.labels_ = std::move(labels);
  return bank;
}

double MixedDataset::TotalEnergy() const {
  double total = 0.0;
  for (const auto& r : rounds) total += r.energy_joules;
  return total;
}

absl::StatusOr<MixedSample> TransmitRound(
    const SampleBank& bank, const PowerAllocation& alloc,
    const MixRatioVector& ratios, const channel::ChannelRealization& channel,
    const channel::ChannelConfig& noise_cfg, Rng& rng, double slot_seconds) {
  if (auto s = CheckSameWorkers(ratios, channel); !s.ok()) return s;
  if (alloc.powers.size() != ratios.ratios.size()) {
    return absl::InvalidArgumentError("allocation size differs from ratios");
  }
  if (!(alloc.beta > 0.0)) {
    return absl::FailedPreconditionError(
        "beta is zero; the normalized sample is undefined");
  }
  const int dx = bank.input_dim();
  const int dy = bank.label_dim();

  // Received superposition: sum_i sqrt(P_i) |h_i| s_i.
  std::vector<double> rx_input(dx, 0.0);
  std::vector<double> rx_label(dy, 0.0);
  for (size_t i = 0; i < ratios.workers.size(); ++i) {
    const int w = ratios.workers[i];
    if (w < 0 || w >= bank.size()) {
      return absl::OutOfRangeError(absl::StrCat("worker ", w, " has no sample"));
    }
    const double gain = std::sqrt(alloc.powers[i]) * channel.magnitudes[i];
    if (gain == 0.0) continue;
    const auto& in = bank.input(w);
    const auto& lab = bank.label(w);
    for (int d = 0; d < dx; ++d) rx_input[d] += gain * in[d];
    for (int d = 0; d < dy; ++d) rx_label[d] += gain * lab[d];
  }
  const double noise_power = noise_cfg.NoisePowerWatts();
  const auto n_input = channel::SampleAwgn(dx, noise_power, rng);
  const auto n_label = channel::SampleAwgn(dy, noise_power, rng);

  MixedSample out;
  out.slot = alloc.slot;
  out.beta = alloc.beta;
  out.b_t = std::sqrt(alloc.beta);
  out.max_q_sq = ratios.MaxSquared();
  out.energy_joules = slot_seconds * alloc.TotalPower();
  out.input_mix.resize(dx);
  out.label_mix.resize(dy);
  for (int d = 0; d < dx; ++d) out.input_mix[d] = (rx_input[d] + n_input[d]) / out.b_t;
  for (int d = 0; d < dy; ++d) out.label_mix[d] = (rx_label[d] + n_label[d]) / out.b_t;
  return out;
}

}  // namespace airmix::mixer
