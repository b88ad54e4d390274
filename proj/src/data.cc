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

#include "airmix/data.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/ascii.h"
#include "absl/strings/strip.h"

namespace airmix::data {
namespace {

constexpr int kIrisFeatures = 4;

const std::vector<std::string>& IrisClasses() {
  static const std::vector<std::string> names = {
      "Iris-setosa", "Iris-versicolor", "Iris-virginica"};
  return names;
}

int IrisClassIndex(absl::string_view name) {
  const auto& names = IrisClasses();
  for (size_t c = 0; c < names.size(); ++c) {
    if (name == names[c] || name == absl::string_view(names[c]).substr(5)) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

}  // namespace

int LabeledDataset::ClassOf(int row) const {
  Eigen::Index idx = 0;
  labels.row(row).maxCoeff(&idx);
  return static_cast<int>(idx);
}

LabeledDataset LabeledDataset::Subset(const std::vector<int>& rows) const {
  LabeledDataset out;
  out.class_names = class_names;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()), labels.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(i) = inputs.row(rows[i]);
    out.labels.row(i) = labels.row(rows[i]);
  }
  return out;
}

absl::Status LabeledDataset::Validate() const {
  if (inputs.rows() != labels.rows()) {
    return absl::InvalidArgumentError("input and label row counts differ");
  }
  if (inputs.size() > 0 && (inputs.minCoeff() < 0.0 || inputs.maxCoeff() > 1.0)) {
    return absl::InvalidArgumentError("inputs outside [0, 1]");
  }
  for (Eigen::Index r = 0; r < labels.rows(); ++r) {
    int ones = 0;
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      const double v = labels(r, c);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        return absl::InvalidArgumentError(absl::StrCat("row ", r, " not one-hot"));
      }
    }
    if (ones != 1) {
      return absl::InvalidArgumentError(absl::StrCat("row ", r, " not one-hot"));
    }
  }
  return absl::OkStatus();
}

void MinMaxNormalize(Eigen::MatrixXd& features) {
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    auto col = features.col(c);
    const double lo = col.minCoeff();
    const double range = col.maxCoeff() - lo;
    if (range > 0.0) {
      col = ((col.array() - lo) / range).matrix();
    } else {
      col.setZero();
    }
  }
}

absl::StatusOr<LabeledDataset> ParseIris(std::istream& in) {
  struct Row {
    int cls;
    std::array<double, kIrisFeatures> x;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const absl::string_view trimmed = absl::StripAsciiWhitespace(line);
    if (trimmed.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(trimmed, ',');
    if (fields.size() != kIrisFeatures + 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": expected ", kIrisFeatures + 1, " columns, got ",
          fields.size()));
    }
    Row row;
    for (int f = 0; f < kIrisFeatures; ++f) {
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(fields[f]), &row.x[f]) ||
          !std::isfinite(row.x[f])) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": bad number '", fields[f], "'"));
      }
    }
    const absl::string_view name = absl::StripAsciiWhitespace(fields.back());
    row.cls = IrisClassIndex(name);
    if (row.cls < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": unknown class '", name, "'"));
    }
    rows.push_back(row);
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError("no Iris rows found");
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.cls, a.x) < std::tie(b.cls, b.x);
  });

  LabeledDataset out;
  out.class_names = IrisClasses();
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.inputs.resize(n, kIrisFeatures);
  out.labels = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(IrisClasses().size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int f = 0; f < kIrisFeatures; ++f) out.inputs(r, f) = rows[r].x[f];
    out.labels(r, rows[r].cls) = 1.0;
  }
  MinMaxNormalize(out.inputs);
  return out;
}

absl::StatusOr<LabeledDataset> LoadIris(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ParseIris(in);
}

void WriteCsv(const LabeledDataset& dataset, std::ostream& out) {
  for (int r = 0; r < dataset.size(); ++r) {
    for (int c = 0; c < dataset.input_dim(); ++c) {
      out << absl::StrCat(dataset.inputs(r, c)) << ',';
    }
    const int cls = dataset.ClassOf(r);
    if (cls < static_cast<int>(dataset.class_names.size())) {
      out << dataset.class_names[cls];
    } else {
      out << "class" << cls;
    }
    out << '\n';
  }
}

absl::StatusOr<LabeledDataset> SynthDataset(int n, int d_x, int d_y,
                                            double separation, Rng& rng) {
  if (d_y < 2 || n < d_y) {
    return absl::InvalidArgumentError("need n >= d_y >= 2");
  }
  if (d_x < 1) return absl::InvalidArgumentError("need d_x >= 1");
  if (!(separation >= 0.0)) {
    return absl::InvalidArgumentError("separation must be non-negative");
  }
  constexpr double kSpread = 0.05;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd centers(d_y, d_x);
  for (int c = 0; c < d_y; ++c) {
    Eigen::VectorXd dir(d_x);
    for (int f = 0; f < d_x; ++f) dir(f) = normal(rng);
    dir /= std::max(dir.norm(), 1e-12);
    centers.row(c) = (0.5 + 0.5 * separation * dir.array()).matrix().transpose();
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  LabeledDataset out;
  out.inputs.resize(n, d_x);
  out.labels = Eigen::MatrixXd::Zero(n, d_y);
  for (int c = 0; c < d_y; ++c) out.class_names.push_back(absl::StrCat("class", c));
  for (int i = 0; i < n; ++i) {
    const int cls = i % d_y;
    const int row = order[i];
    for (int f = 0; f < d_x; ++f) {
      out.inputs(row, f) =
          std::clamp(centers(cls, f) + kSpread * normal(rng), 0.0, 1.0);
    }
    out.labels(row, cls) = 1.0;
  }
  return out;
}

absl::StatusOr<Split> StratifiedSplit(const LabeledDataset& dataset, int n_test,
                                      Rng& rng) {
  const int n = dataset.size();
  if (n_test < 0 || n_test >= n) {
    return absl::InvalidArgumentError("test size must lie in [0, n)");
  }
  std::vector<std::vector<int>> by_class(dataset.label_dim());
  for (int r = 0; r < n; ++r) by_class[dataset.ClassOf(r)].push_back(r);
  for (auto& rows : by_class) std::shuffle(rows.begin(), rows.end(), rng);

  // Largest-remainder allocation of the test rows across classes.
  const int k = dataset.label_dim();
  std::vector<int> quota(k);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double exact = static_cast<double>(n_test) * by_class[c].size() / n;
    quota[c] = static_cast<int>(std::floor(exact));
    assigned += quota[c];
    remainders.push_back({exact - quota[c], c});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = 0; assigned < n_test; ++i, ++assigned) {
    ++quota[remainders[i % remainders.size()].second];
  }

  std::vector<int> train_rows;
  std::vector<int> test_rows;
  for (int c = 0; c < k; ++c) {
    for (size_t i = 0; i < by_class[c].size(); ++i) {
      (static_cast<int>(i) < quota[c] ? test_rows : train_rows)
          .push_back(by_class[c][i]);
    }
  }
  std::shuffle(train_rows.begin(), train_rows.end(), rng);
  std::shuffle(test_rows.begin(), test_rows.end(), rng);
  return Split{dataset.Subset(train_rows), dataset.Subset(test_rows)};
}

absl::StatusOr<WorkerAssignment> AssignToWorkers(const LabeledDataset& dataset,
                                                 int n_workers, int pool_size,
                                                 Rng& rng) {
  if (pool_size <= 0) {
    return absl::InvalidArgumentError("pool size must be positive");
  }
  if (pool_size > dataset.size()) {
    return absl::InvalidArgumentError("pool size exceeds dataset rows");
  }
  if (n_workers < 1) {
    return absl::InvalidArgumentError("need at least one worker");
  }
  if (auto s = dataset.Validate(); !s.ok()) return s;
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_int_distribution<int> pick(0, pool_size - 1);
  std::vector<int> sample_index(n_workers);
  std::vector<std::vector<double>> inputs(n_workers);
  std::vector<std::vector<double>> labels(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    sample_index[w] = pick(rng);
    const int row = order[sample_index[w]];
    inputs[w].resize(dataset.input_dim());
    for (int f = 0; f < dataset.input_dim(); ++f) inputs[w][f] = dataset.inputs(row, f);
    labels[w].resize(dataset.label_dim());
    for (int c = 0; c < dataset.label_dim(); ++c) labels[w][c] = dataset.labels(row, c);
  }
  auto bank = mixer::SampleBank::Create(std::move(inputs), std::move(labels));
  if (!bank.ok()) return bank.status();
  return WorkerAssignment{*std::move(bank), std::move(sample_index)};
}

}  // namespace airmix::data
