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

#ifndef AIRMIX_RNG_H_
#define AIRMIX_RNG_H_

#include <cstdint>
#include <random>

namespace airmix {

using Rng = std::mt19937_64;

// Independent stream families derived from one master seed. Each family is
// further split per slot (or per repetition) with DeriveSeed.
enum class StreamTag : uint64_t {
  kPlacement = 1,
  kScheduling = 2,
  kMixing = 3,
  kAssignment = 4,
  kFading = 5,
  kNoise = 6,
  kDataSplit = 7,
  kDataAssign = 8,
  kTraining = 9,
  kRepetition = 10,
};

// SplitMix64 finalizer.
uint64_t MixBits(uint64_t x);

// Deterministically combines a parent seed with a tag and an index. Distinct
// (tag, index) pairs give statistically independent child seeds.
uint64_t DeriveSeed(uint64_t parent, uint64_t tag, uint64_t index = 0);

inline uint64_t DeriveSeed(uint64_t parent, StreamTag tag, uint64_t index = 0) {
  return DeriveSeed(parent, static_cast<uint64_t>(tag), index);
}

inline Rng MakeRng(uint64_t seed) { return Rng(seed); }

inline Rng MakeRng(uint64_t seed, uint64_t index) {
  return Rng(DeriveSeed(seed, 0, index));
}

}  // namespace airmix

#endif  // AIRMIX_RNG_H_
