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

#ifndef AIRMIX_LEARNER_H_
#define AIRMIX_LEARNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/mixer.h"

namespace airmix::learner {

struct TrainConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  int batch_size = 32;
  int epochs = 500;
  uint64_t seed = 0;

  absl::Status Validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // fan_out x fan_in
  Eigen::VectorXd bias;
};

// Fully connected stack with rectifier hidden units and a softmax output.
struct ModelState {
  std::vector<int> layer_sizes;  // d_X, hidden..., d_Y
  std::vector<DenseLayer> layers;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  int64_t step = 0;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int64_t ParameterCount() const;
  absl::Status Validate() const;
};

// Symmetric uniform fan-in scaled initialization, fixed by `seed`.
absl::StatusOr<ModelState> InitModel(const std::vector<int>& layer_sizes,
                                     uint64_t seed);

// Row-wise softmax probabilities for a batch (rows are samples).
Eigen::MatrixXd Predict(const ModelState& model, const Eigen::MatrixXd& inputs);

// Pre-softmax outputs.
Eigen::MatrixXd Logits(const ModelState& model, const Eigen::MatrixXd& inputs);

// Clamps negative soft-label entries to zero and renormalizes each row; a row
// with no positive mass becomes uniform.
Eigen::MatrixXd CleanSoftLabels(const Eigen::MatrixXd& labels);

// Mean cross-entropy -sum_k y_k ln p_k over the batch; `targets` are used
// as given.
double CrossEntropy(const ModelState& model, const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets);

struct Gradients {
  std::vector<DenseLayer> layers;
  double loss = 0.0;
};

Gradients ComputeGradients(const ModelState& model,
                           const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& targets);

// One bias-corrected Adam update.
void AdamStep(ModelState& model, const Gradients& grads,
              const TrainConfig& cfg);

struct TrainResult {
  ModelState model;
  std::vector<double> epoch_loss;
};

// Minibatch Adam on (inputs, soft targets).
absl::StatusOr<TrainResult> TrainOnArrays(const Eigen::MatrixXd& inputs,
                                          const Eigen::MatrixXd& labels,
                                          const TrainConfig& cfg,
                                          const std::vector<int>& layer_sizes);

// Trains on the normalized mixed samples; labels are cleaned first.
absl::StatusOr<TrainResult> Train(const mixer::MixedDataset& dataset,
                                  const TrainConfig& cfg,
                                  const std::vector<int>& layer_sizes);

// Fraction of rows whose argmax prediction matches the argmax label.
absl::StatusOr<double> Evaluate(const ModelState& model,
                                const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& labels);

absl::Status SaveCheckpoint(const ModelState& model, const std::string& path);
absl::StatusOr<ModelState> LoadCheckpoint(const std::string& path);

}  // namespace airmix::learner

#endif  // AIRMIX_LEARNER_H_
