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

#include "airmix/channel.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace airmix::channel {

double Distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }

double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

absl::Status WorkerField::Validate() const {
  if (positions.empty()) {
    return absl::InvalidArgumentError("worker field needs at least one worker");
  }
  auto inside = [this](const Point& p) {
    return p.x >= 0.0 && p.x <= side_m && p.y >= 0.0 && p.y <= side_m;
  };
  if (!inside(server)) {
    return absl::InvalidArgumentError("server outside the field");
  }
  for (size_t i = 0; i < positions.size(); ++i) {
    if (!inside(positions[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("worker ", i, " outside the field"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<WorkerField> PlaceWorkers(int n_workers, double side_m,
                                         Rng& rng) {
  if (n_workers < 1) {
    return absl::InvalidArgumentError("n_workers must be >= 1");
  }
  if (!(side_m > 0.0)) {
    return absl::InvalidArgumentError("field side must be positive");
  }
  WorkerField field;
  field.side_m = side_m;
  field.server = {side_m / 2.0, side_m / 2.0};
  field.positions.reserve(n_workers);
  std::uniform_real_distribution<double> coord(0.0, side_m);
  for (int i = 0; i < n_workers; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    field.positions.push_back({x, y});
  }
  return field;
}

std::string FadingName(const Fading& fading) {
  switch (fading.kind) {
    case FadingKind::kNone:
      return "none";
    case FadingKind::kRician:
      return absl::StrCat("rician(K=", fading.rician_k, ")");
    case FadingKind::kRayleigh:
      return "rayleigh";
  }
  return "unknown";
}

double ChannelConfig::UnitPathlossLinear() const {
  return DbToLinear(unit_pathloss_db);
}

double ChannelConfig::NoisePowerWatts() const {
  return DbmToWatts(noise_power_dbm);
}

absl::Status ChannelConfig::Validate() const {
  if (!(pathloss_exponent > 0.0)) {
    return absl::InvalidArgumentError("path-loss exponent must be positive");
  }
  if (fading.kind == FadingKind::kRician && !(fading.rician_k >= 0.0)) {
    return absl::InvalidArgumentError("Rician K must be non-negative");
  }
  // A noise power of -inf dBm is the noiseless limit.
  if (!std::isfinite(unit_pathloss_db) || std::isnan(noise_power_dbm) ||
      noise_power_dbm == std::numeric_limits<double>::infinity()) {
    return absl::InvalidArgumentError("channel dB values must be finite");
  }
  return absl::OkStatus();
}

double PathlossAmplitude(double distance_m, const ChannelConfig& cfg) {
  const double d = std::max(distance_m, kMinDistanceMeters);
  return std::sqrt(cfg.UnitPathlossLinear()) *
         std::pow(d, -cfg.pathloss_exponent / 2.0);
}

double SampleFadingMagnitude(const Fading& fading, Rng& rng) {
  switch (fading.kind) {
    case FadingKind::kNone:
      return 1.0;
    case FadingKind::kRician: {
      // Line-of-sight component plus a CN(0, 1/(K+1)) scatter component.
      const double k = fading.rician_k;
      const double los = std::sqrt(k / (k + 1.0));
      const double scatter = std::sqrt(1.0 / (k + 1.0));
      std::normal_distribution<double> half(0.0, std::sqrt(0.5));
      const double re = los + scatter * half(rng);
      const double im = scatter * half(rng);
      return std::hypot(re, im);
    }
    case FadingKind::kRayleigh: {
      // |g|^2 ~ Exp(1), drawn by inversion.
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double u = 1.0 - unit(rng);  // (0, 1]
      return std::sqrt(-std::log(u));
    }
  }
  return 1.0;
}

absl::StatusOr<ChannelRealization> SampleChannel(const WorkerField& field,
                                                 const ChannelConfig& cfg,
                                                 std::span<const int> scheduled,
                                                 int64_t slot, Rng& rng) {
  ChannelRealization out;
  out.slot = slot;
  out.workers.reserve(scheduled.size());
  out.magnitudes.reserve(scheduled.size());
  for (int w : scheduled) {
    if (w < 0 || w >= field.size()) {
      return absl::OutOfRangeError(absl::StrCat("worker ", w, " not in field"));
    }
    const double d = Distance(field.positions[w], field.server);
    if (d == 0.0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "worker ", w, " is co-located with the server; path loss undefined"));
    }
    const double g = SampleFadingMagnitude(cfg.fading, rng);
    out.workers.push_back(w);
    out.magnitudes.push_back(
        std::max(PathlossAmplitude(d, cfg) * g, kMagnitudeFloor));
  }
  return out;
}

std::vector<double> SampleAwgn(int dim, double noise_power, Rng& rng) {
  std::vector<double> out(std::max(dim, 0), 0.0);
  if (noise_power <= 0.0) return out;
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
  for (double& v : out) v = normal(rng);
  return out;
}

}  // namespace airmix::channel
