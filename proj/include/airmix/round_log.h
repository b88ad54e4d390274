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

#ifndef AIRMIX_ROUND_LOG_H_
#define AIRMIX_ROUND_LOG_H_

#include <istream>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/mixer.h"

namespace airmix {

// CSV round log, one row per released slot:
//   slot,beta,energy_j,max_q_sq,b_t,x0..x{d_X-1},y0..y{d_Y-1}
// Values are written with 17 significant digits so a read-back is exact.
void WriteRoundLog(const mixer::MixedDataset& dataset, std::ostream& out);
absl::Status WriteRoundLog(const mixer::MixedDataset& dataset,
                           const std::string& path);

absl::StatusOr<mixer::MixedDataset> ReadRoundLog(std::istream& in);
absl::StatusOr<mixer::MixedDataset> ReadRoundLog(const std::string& path);

}  // namespace airmix

#endif  // AIRMIX_ROUND_LOG_H_
