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

#ifndef AIRMIX_DATA_H_
#define AIRMIX_DATA_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/mixer.h"
#include "airmix/rng.h"

namespace airmix::data {

// Row-major samples: `inputs` is n x d_X, `labels` is n x d_Y one-hot.
struct LabeledDataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd labels;
  std::vector<std::string> class_names;

  int size() const { return static_cast<int>(inputs.rows()); }
  int input_dim() const { return static_cast<int>(inputs.cols()); }
  int label_dim() const { return static_cast<int>(labels.cols()); }
  int ClassOf(int row) const;

  LabeledDataset Subset(const std::vector<int>& rows) const;
  absl::Status Validate() const;
};

// Per-column min-max scaling to [0, 1]. Constant columns map to 0.
void MinMaxNormalize(Eigen::MatrixXd& features);

// Parses headerless Iris CSV: four numeric features then the class name.
// Rows are put in canonical order (class, then features) and the features
// are min-max scaled over the whole file.
absl::StatusOr<LabeledDataset> ParseIris(std::istream& in);
absl::StatusOr<LabeledDataset> LoadIris(const std::string& path);

// Writes the dataset in the same CSV shape ParseIris reads.
void WriteCsv(const LabeledDataset& dataset, std::ostream& out);

// Gaussian class blobs clipped into [0, 1]^d_x. Row i belongs to class
// i mod d_y before shuffling, so every class is present when n >= d_y.
absl::StatusOr<LabeledDataset> SynthDataset(int n, int d_x, int d_y,
                                            double separation, Rng& rng);

struct Split {
  LabeledDataset train;
  LabeledDataset test;
};

// Class-stratified shuffle split with `n_test` rows held out.
absl::StatusOr<Split> StratifiedSplit(const LabeledDataset& dataset,
                                      int n_test, Rng& rng);

struct WorkerAssignment {
  mixer::SampleBank bank;
  std::vector<int> sample_index;  // row of the shuffled pool held by worker i
};

// Each worker draws one sample uniformly with replacement from the first
// `pool_size` rows of a seed-shuffled copy of the dataset.
absl::StatusOr<WorkerAssignment> AssignToWorkers(const LabeledDataset& dataset,
                                                 int n_workers, int pool_size,
                                                 Rng& rng);

}  // namespace airmix::data

#endif  // AIRMIX_DATA_H_
