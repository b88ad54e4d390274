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

#include "airmix/round_log.h"

#include <fstream>
#include <vector>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace airmix {
namespace {

constexpr int kFixedColumns = 5;

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

}  // namespace

void WriteRoundLog(const mixer::MixedDataset& dataset, std::ostream& out) {
  out << "slot,beta,energy_j,max_q_sq,b_t";
  for (int d = 0; d < dataset.input_dim; ++d) out << ",x" << d;
  for (int d = 0; d < dataset.label_dim; ++d) out << ",y" << d;
  out << '\n';
  for (const auto& r : dataset.rounds) {
    out << r.slot << ',' << Num(r.beta) << ',' << Num(r.energy_joules) << ','
        << Num(r.max_q_sq) << ',' << Num(r.b_t);
    for (double v : r.input_mix) out << ',' << Num(v);
    for (double v : r.label_mix) out << ',' << Num(v);
    out << '\n';
  }
}

absl::Status WriteRoundLog(const mixer::MixedDataset& dataset,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  WriteRoundLog(dataset, out);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<mixer::MixedDataset> ReadRoundLog(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("round log has no header");
  }
  mixer::MixedDataset out;
  std::vector<absl::string_view> header =
      absl::StrSplit(absl::StripAsciiWhitespace(line), ',');
  if (header.size() < kFixedColumns + 2 || header[0] != "slot") {
    return absl::InvalidArgumentError("unrecognized round log header");
  }
  for (size_t c = kFixedColumns; c < header.size(); ++c) {
    if (absl::StartsWith(header[c], "x")) {
      ++out.input_dim;
    } else if (absl::StartsWith(header[c], "y")) {
      ++out.label_dim;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unexpected column ", header[c]));
    }
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const absl::string_view trimmed = absl::StripAsciiWhitespace(line);
    if (trimmed.empty()) continue;
    std::vector<absl::string_view> f = absl::StrSplit(trimmed, ',');
    if (f.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": wrong column count"));
    }
    std::vector<double> v(f.size());
    for (size_t c = 1; c < f.size(); ++c) {
      if (!absl::SimpleAtod(f[c], &v[c])) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": bad number '", f[c], "'"));
      }
    }
    mixer::MixedSample s;
    if (!absl::SimpleAtoi(f[0], &s.slot)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": bad slot index"));
    }
    s.beta = v[1];
    s.energy_joules = v[2];
    s.max_q_sq = v[3];
    s.b_t = v[4];
    s.input_mix.assign(v.begin() + kFixedColumns,
                       v.begin() + kFixedColumns + out.input_dim);
    s.label_mix.assign(v.begin() + kFixedColumns + out.input_dim, v.end());
    out.rounds.push_back(std::move(s));
  }
  return out;
}

absl::StatusOr<mixer::MixedDataset> ReadRoundLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadRoundLog(in);
}

}  // namespace airmix
