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

#include "airmix/learner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "airmix/rng.h"
#include "json.hpp"

namespace airmix::learner {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<DenseLayer> ZerosLike(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                   VectorXd::Zero(l.bias.size())});
  }
  return out;
}

// Column-wise log-softmax; columns are samples.
MatrixXd LogSoftmaxColumns(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double top = logits.col(c).maxCoeff();
    const double lse =
        top + std::log((logits.col(c).array() - top).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

struct ForwardPass {
  std::vector<MatrixXd> activations;  // activations[0] = inputs^T
  std::vector<MatrixXd> pre;          // pre-activations per layer
};

ForwardPass Forward(const ModelState& model, const MatrixXd& inputs) {
  ForwardPass fp;
  fp.activations.push_back(inputs.transpose());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    MatrixXd z = layer.weights * fp.activations.back();
    z.colwise() += layer.bias;
    fp.pre.push_back(z);
    if (l + 1 < model.layers.size()) {
      fp.activations.push_back(z.cwiseMax(0.0));
    }
  }
  return fp;
}

}  // namespace

absl::Status TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    return absl::InvalidArgumentError("Adam decay rates must lie in (0, 1)");
  }
  if (!(adam_epsilon > 0.0)) {
    return absl::InvalidArgumentError("Adam epsilon must be positive");
  }
  if (batch_size < 1 || epochs < 0) {
    return absl::InvalidArgumentError("batch size must be >= 1, epochs >= 0");
  }
  return absl::OkStatus();
}

int64_t ModelState::ParameterCount() const {
  int64_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

absl::Status ModelState::Validate() const {
  if (layer_sizes.size() < 2 || layers.size() + 1 != layer_sizes.size()) {
    return absl::InvalidArgumentError("layer sizes and layers disagree");
  }
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weights;
    if (w.cols() != layer_sizes[l] || w.rows() != layer_sizes[l + 1] ||
        layers[l].bias.size() != layer_sizes[l + 1]) {
      return absl::InvalidArgumentError(absl::StrCat("layer ", l, " mis-shaped"));
    }
    if (!w.allFinite() || !layers[l].bias.allFinite()) {
      return absl::InvalidArgumentError(
          absl::StrCat("layer ", l, " has non-finite entries"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ModelState> InitModel(const std::vector<int>& layer_sizes,
                                     uint64_t seed) {
  if (layer_sizes.size() < 2) {
    return absl::InvalidArgumentError("need at least input and output sizes");
  }
  for (int s : layer_sizes) {
    if (s < 1) return absl::InvalidArgumentError("layer sizes must be >= 1");
  }
  ModelState model;
  model.layer_sizes = layer_sizes;
  Rng rng(DeriveSeed(seed, 0x1417));
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> init(-limit, limit);
    DenseLayer layer{MatrixXd(fan_out, fan_in), VectorXd::Zero(fan_out)};
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = init(rng);
      }
    }
    model.layers.push_back(std::move(layer));
  }
  model.first_moment = ZerosLike(model.layers);
  model.second_moment = ZerosLike(model.layers);
  return model;
}

MatrixXd Logits(const ModelState& model, const MatrixXd& inputs) {
  return Forward(model, inputs).pre.back().transpose();
}

MatrixXd Predict(const ModelState& model, const MatrixXd& inputs) {
  return LogSoftmaxColumns(Forward(model, inputs).pre.back())
      .array()
      .exp()
      .matrix()
      .transpose();
}

MatrixXd CleanSoftLabels(const MatrixXd& labels) {
  MatrixXd out = labels.cwiseMax(0.0);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double sum = out.row(r).sum();
    if (sum > 0.0) {
      out.row(r) /= sum;
    } else {
      out.row(r).setConstant(1.0 / static_cast<double>(out.cols()));
    }
  }
  return out;
}

double CrossEntropy(const ModelState& model, const MatrixXd& inputs,
                    const MatrixXd& targets) {
  const MatrixXd log_p = LogSoftmaxColumns(Forward(model, inputs).pre.back());
  return -(targets.transpose().array() * log_p.array()).sum() /
         static_cast<double>(inputs.rows());
}

Gradients ComputeGradients(const ModelState& model, const MatrixXd& inputs,
                           const MatrixXd& targets) {
  const ForwardPass fp = Forward(model, inputs);
  const double batch = static_cast<double>(inputs.rows());
  const MatrixXd log_p = LogSoftmaxColumns(fp.pre.back());
  const MatrixXd y = targets.transpose();

  Gradients grads;
  grads.loss = -(y.array() * log_p.array()).sum() / batch;
  grads.layers = ZerosLike(model.layers);

  // d loss / d logits = p * sum(y) - y, averaged over the batch.
  const Eigen::RowVectorXd mass = y.colwise().sum();
  MatrixXd delta = log_p.array().exp().matrix();
  delta = (delta.array().rowwise() * mass.array()).matrix() - y;
  delta /= batch;
  for (size_t l = model.layers.size(); l-- > 0;) {
    grads.layers[l].weights = delta * fp.activations[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      MatrixXd back = model.layers[l].weights.transpose() * delta;
      delta = (back.array() * (fp.pre[l - 1].array() > 0.0).cast<double>())
                  .matrix();
    }
  }
  return grads;
}

void AdamStep(ModelState& model, const Gradients& grads,
              const TrainConfig& cfg) {
  ++model.step;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(model.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(model.step));
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= cfg.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + cfg.adam_epsilon);
  };
  for (size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weights, model.first_moment[l].weights,
           model.second_moment[l].weights, grads.layers[l].weights);
    update(model.layers[l].bias, model.first_moment[l].bias,
           model.second_moment[l].bias, grads.layers[l].bias);
  }
}

absl::StatusOr<TrainResult> TrainOnArrays(const MatrixXd& inputs,
                                          const MatrixXd& labels,
                                          const TrainConfig& cfg,
                                          const std::vector<int>& layer_sizes) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  auto init = InitModel(layer_sizes, cfg.seed);
  if (!init.ok()) return init.status();
  if (inputs.cols() != layer_sizes.front() ||
      labels.cols() != layer_sizes.back()) {
    return absl::InvalidArgumentError(
        "architecture does not match data dimensions");
  }
  if (inputs.rows() != labels.rows()) {
    return absl::InvalidArgumentError("input and label counts differ");
  }
  TrainResult result{*std::move(init), {}};
  const Eigen::Index n = inputs.rows();
  if (n == 0) return result;

  Rng rng(DeriveSeed(cfg.seed, 0x5eed));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  MatrixXd batch_x;
  MatrixXd batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch_x.resize(size, inputs.cols());
      batch_y.resize(size, labels.cols());
      for (Eigen::Index i = 0; i < size; ++i) {
        batch_x.row(i) = inputs.row(order[start + i]);
        batch_y.row(i) = labels.row(order[start + i]);
      }
      const Gradients grads = ComputeGradients(result.model, batch_x, batch_y);
      if (!std::isfinite(grads.loss)) {
        return absl::InternalError(absl::StrCat(
            "non-finite training loss at epoch ", epoch,
            "; the mixed samples are likely dominated by noise (beta too small)"));
      }
      loss_sum += grads.loss * static_cast<double>(size);
      AdamStep(result.model, grads, cfg);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

absl::StatusOr<TrainResult> Train(const mixer::MixedDataset& dataset,
                                  const TrainConfig& cfg,
                                  const std::vector<int>& layer_sizes) {
  const auto n = static_cast<Eigen::Index>(dataset.rounds.size());
  MatrixXd inputs(n, dataset.input_dim);
  MatrixXd labels(n, dataset.label_dim);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& r = dataset.rounds[t];
    if (static_cast<int>(r.input_mix.size()) != dataset.input_dim ||
        static_cast<int>(r.label_mix.size()) != dataset.label_dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("round ", t, " has the wrong dimensions"));
    }
    for (int d = 0; d < dataset.input_dim; ++d) inputs(t, d) = r.input_mix[d];
    for (int d = 0; d < dataset.label_dim; ++d) labels(t, d) = r.label_mix[d];
  }
  if (!inputs.allFinite() || !labels.allFinite()) {
    return absl::InvalidArgumentError("mixed samples contain non-finite values");
  }
  return TrainOnArrays(inputs, CleanSoftLabels(labels), cfg, layer_sizes);
}

absl::StatusOr<double> Evaluate(const ModelState& model, const MatrixXd& inputs,
                                const MatrixXd& labels) {
  if (inputs.rows() == 0) {
    return absl::InvalidArgumentError("empty test set");
  }
  if (inputs.rows() != labels.rows() || inputs.cols() != model.input_dim() ||
      labels.cols() != model.output_dim()) {
    return absl::InvalidArgumentError("test data does not match the model");
  }
  const MatrixXd logits = Logits(model, inputs);
  int correct = 0;
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    Eigen::Index predicted = 0;
    Eigen::Index truth = 0;
    logits.row(r).maxCoeff(&predicted);
    labels.row(r).maxCoeff(&truth);
    correct += predicted == truth ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

absl::Status SaveCheckpoint(const ModelState& model, const std::string& path) {
  nlohmann::json j;
  j["format"] = "airmix-mlp";
  j["activation"] = "relu";
  j["output"] = "softmax";
  j["layer_sizes"] = model.layer_sizes;
  j["step"] = model.step;
  for (const auto& l : model.layers) {
    nlohmann::json layer;
    std::vector<std::vector<double>> w(l.weights.rows(),
                                       std::vector<double>(l.weights.cols()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w[r][c] = l.weights(r, c);
    }
    layer["weights"] = w;
    layer["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    j["layers"].push_back(layer);
  }
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << j.dump(1) << '\n';
  return absl::OkStatus();
}

absl::StatusOr<ModelState> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "airmix-mlp") {
      return absl::InvalidArgumentError("not an airmix-mlp checkpoint");
    }
    ModelState model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    model.step = j.value("step", int64_t{0});
    for (const auto& layer : j.at("layers")) {
      const auto w = layer.at("weights").get<std::vector<std::vector<double>>>();
      const auto b = layer.at("bias").get<std::vector<double>>();
      DenseLayer dense{MatrixXd(static_cast<Eigen::Index>(w.size()),
                                w.empty() ? 0 : static_cast<Eigen::Index>(w[0].size())),
                       Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()))};
      for (size_t r = 0; r < w.size(); ++r) {
        if (w[r].size() != w[0].size()) {
          return absl::InvalidArgumentError("ragged weight matrix");
        }
        for (size_t c = 0; c < w[r].size(); ++c) dense.weights(r, c) = w[r][c];
      }
      model.layers.push_back(std::move(dense));
    }
    model.first_moment = ZerosLike(model.layers);
    model.second_moment = ZerosLike(model.layers);
    if (auto s = model.Validate(); !s.ok()) return s;
    return model;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad checkpoint: ", e.what()));
  }
}

}  // namespace airmix::learner
