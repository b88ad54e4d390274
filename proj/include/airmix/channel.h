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

#ifndef AIRMIX_CHANNEL_H_
#define AIRMIX_CHANNEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/rng.h"

namespace airmix::channel {

// Magnitudes below this are clamped so that channel inversion stays finite.
inline constexpr double kMagnitudeFloor = 1e-12;
// Distances below one meter are clamped to one meter.
inline constexpr double kMinDistanceMeters = 1.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double Distance(const Point& a, const Point& b);

// Worker and server geometry inside a square of side `side_m` whose lower-left
// corner is the origin.
struct WorkerField {
  std::vector<Point> positions;
  Point server;
  double side_m = 500.0;

  int size() const { return static_cast<int>(positions.size()); }
  absl::Status Validate() const;
};

// Uniform placement over the square with the server at its center.
absl::StatusOr<WorkerField> PlaceWorkers(int n_workers, double side_m,
                                         Rng& rng);

enum class FadingKind { kNone, kRician, kRayleigh };

struct Fading {
  FadingKind kind = FadingKind::kNone;
  double rician_k = 0.0;
};

std::string FadingName(const Fading& fading);

struct ChannelConfig {
  double unit_pathloss_db = -32.0;
  double pathloss_exponent = 2.0;
  Fading fading;
  double noise_power_dbm = -114.0;

  double UnitPathlossLinear() const;
  double NoisePowerWatts() const;
  absl::Status Validate() const;
};

double DbmToWatts(double dbm);
double DbToLinear(double db);

// Per-slot channel magnitudes of the scheduled workers, parallel arrays.
struct ChannelRealization {
  int64_t slot = 0;
  std::vector<int> workers;
  std::vector<double> magnitudes;

  int size() const { return static_cast<int>(workers.size()); }
};

// Large-scale amplitude gain sqrt(beta_U) * d^(-n/2), with the distance floor.
double PathlossAmplitude(double distance_m, const ChannelConfig& cfg);

// Small-scale fading magnitude |g| with E[|g|^2] = 1 (1 for kNone).
double SampleFadingMagnitude(const Fading& fading, Rng& rng);

// One block-fading draw per scheduled worker. Fails if a scheduled worker
// sits exactly on the server or is out of range.
absl::StatusOr<ChannelRealization> SampleChannel(const WorkerField& field,
                                                 const ChannelConfig& cfg,
                                                 std::span<const int> scheduled,
                                                 int64_t slot, Rng& rng);

// Real part of circularly-symmetric complex noise of power `noise_power`:
// i.i.d. N(0, noise_power / 2) entries. Zero power yields zeros.
std::vector<double> SampleAwgn(int dim, double noise_power, Rng& rng);

}  // namespace airmix::channel

#endif  // AIRMIX_CHANNEL_H_
