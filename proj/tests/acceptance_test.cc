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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "airmix/channel.h"
#include "airmix/config.h"
#include "airmix/harness.h"
#include "airmix/learner.h"
#include "airmix/mixer.h"
#include "airmix/privacy.h"
#include "airmix/rng.h"
#include "oracles.h"

namespace airmix {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double LogUniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

struct RandomBudget {
  privacy::PrivacyBudget budget;
  double max_q_sq = 0.0;
  double beta = 0.0;
};

// Random non-silent budgets with their solved beta.
std::vector<RandomBudget> DrawBudgets(int count, Rng& rng, int* rejected) {
  std::vector<RandomBudget> out;
  std::uniform_int_distribution<int64_t> slots(1, 10000);
  std::uniform_int_distribution<int> dims(2, 800);
  std::uniform_real_distribution<double> q_sq(1e-3, 1.0);
  while (static_cast<int>(out.size()) < count) {
    RandomBudget b;
    b.budget.epsilon = LogUniform(1.0, 1e4, rng);
    b.budget.delta = LogUniform(1e-4, 0.1, rng);
    b.budget.slots = slots(rng);
    b.budget.sampling_ratio = LogUniform(1e-3, 0.5, rng);
    const int total = dims(rng);
    b.budget.label_dim = std::uniform_int_distribution<int>(1, total - 1)(rng);
    b.budget.input_dim = total - b.budget.label_dim;
    b.budget.noise_power = channel::DbmToWatts(-114.0);
    b.max_q_sq = q_sq(rng);
    auto sol = privacy::SolveBeta(b.budget, b.max_q_sq);
    if (!sol.ok() || sol->silent) {
      ++*rejected;
      continue;
    }
    b.beta = sol->beta;
    out.push_back(b);
  }
  return out;
}

Outcome Criterion1() {
  Rng rng = MakeRng(101);
  const auto start = Clock::now();
  int rejected = 0;
  const auto budgets = DrawBudgets(200, rng, &rejected);
  double worst = 0.0;
  bool ok = true;
  for (const auto& b : budgets) {
    const std::vector<double> q(1, b.max_q_sq);
    privacy::PrivacyBudget one = b.budget;
    auto loose = privacy::LooseEpsilon(
        one, std::vector<double>(static_cast<size_t>(one.slots), b.max_q_sq), b.beta);
    if (!loose.ok()) {
      ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(*loose - b.budget.epsilon) / b.budget.epsilon);
  }
  const double t = Seconds(start);
  return {ok && worst <= 1e-6 && t < 1.0,
          absl::StrFormat("200 budgets (%d silent redrawn), max rel err %.3g, %.3f s",
                          rejected, worst, t)};
}

Outcome Criterion2() {
  Rng rng = MakeRng(101);
  int rejected = 0;
  const auto budgets = DrawBudgets(200, rng, &rejected);
  const auto start = Clock::now();
  int above = 0;
  int non_monotone = 0;
  int errors = 0;
  for (const auto& b : budgets) {
    const std::vector<double> q(static_cast<size_t>(b.budget.slots), b.max_q_sq);
    auto loose = privacy::LooseEpsilon(b.budget, q, b.beta);
    double previous = std::numeric_limits<double>::infinity();
    for (double scale : {1.0, 0.5, 0.25, 0.1, 0.01}) {
      auto tight = privacy::ComputeTightEpsilon(b.budget, q, b.beta * scale);
      if (!tight.ok() || !loose.ok()) {
        ++errors;
        break;
      }
      if (scale == 1.0 && tight->epsilon > *loose * (1 + 1e-12)) ++above;
      if (tight->epsilon > previous * (1 + 1e-12)) ++non_monotone;
      previous = tight->epsilon;
    }
  }
  const double t = Seconds(start);
  return {above == 0 && non_monotone == 0 && errors == 0 && t < 30.0,
          absl::StrFormat("tight>loose %d, non-monotone steps %d, errors %d, %.2f s",
                          above, non_monotone, errors, t)};
}

Outcome Criterion3() {
  Rng rng = MakeRng(303);
  const auto start = Clock::now();
  double worst = 0.0;
  int cases = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int dim = 1; dim <= 5; ++dim) {
      std::vector<std::vector<double>> ratio_sets;
      ratio_sets.push_back(std::vector<double>(n, 1.0 / n));
      std::vector<double> corner(n, 0.0);
      corner[0] = 1.0;
      ratio_sets.push_back(corner);
      std::vector<int> workers(n);
      for (int i = 0; i < n; ++i) workers[i] = i;
      for (double alpha : {0.3, 1.0, 10.0}) {
        auto q = mixer::SampleMixRatios(workers, alpha, {}, 0, rng);
        if (q.ok()) ratio_sets.push_back(q->ratios);
      }
      for (const auto& q : ratio_sets) {
        const double max_q = *std::max_element(q.begin(), q.end());
        const double expected = max_q * max_q * dim;
        const double brute = oracle::BruteForceMeanShift(q, dim);
        const double library = privacy::WorstCaseMeanShift(q, dim);
        worst = std::max({worst, std::abs(brute - expected),
                          std::abs(library - expected)});
        ++cases;
      }
    }
  }
  const double t = Seconds(start);
  return {worst <= 1e-12 && t < 10.0,
          absl::StrFormat("%d ratio vectors, max abs err %.3g, %.2f s", cases, worst, t)};
}

Outcome Criterion4() {
  struct Triple {
    double gamma, s, v;
  };
  const std::vector<Triple> triples = {
      {2, 0.5, 1.0},  {3, 0.3, 1.0}, {4, 0.2, 0.5},  {8, 0.1, 1.0},
      {16, 0.05, 0.5}, {2, 1.0, 2.0}, {5, 0.2, 1.0}, {10, 0.1, 0.8},
      {32, 0.02, 0.3}, {6, 0.3, 2.0}};
  const auto start = Clock::now();
  int misses = 0;
  double worst_z = 0.0;
  double worst_formula = 0.0;
  Rng rng = MakeRng(404);
  for (const auto& tr : triples) {
    const double closed = tr.gamma * tr.s * tr.s / (2 * tr.v);
    auto e = privacy::EstimateGaussianRenyi(tr.gamma, tr.s, tr.v, 1000000, rng);
    if (!e.ok()) {
      ++misses;
      continue;
    }
    const double z = std::abs(e->divergence - closed) / e->standard_error;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++misses;
    // Per-dimension divergence bound: shift q sqrt(beta), variance sigma^2/2.
    privacy::PrivacyBudget budget;
    budget.input_dim = 1;
    budget.label_dim = 0;
    budget.noise_power = 2 * tr.v;
    const double q_sq = 0.25;
    const double bound = privacy::RenyiDivergenceBound(tr.gamma, q_sq, budget,
                                                       tr.s * tr.s / q_sq);
    worst_formula = std::max(worst_formula, std::abs(bound - closed) / closed);
  }
  const double t = Seconds(start);
  return {misses == 0 && worst_formula <= 1e-12 && t < 30.0,
          absl::StrFormat("10 triples, worst |z| %.2f, bound rel err %.3g, %.2f s",
                          worst_z, worst_formula, t)};
}

Outcome Criterion5() {
  const auto start = Clock::now();
  Rng rng = MakeRng(505);
  std::string detail;
  bool ok = true;
  for (int nt : {4, 8}) {
    std::vector<int> workers(nt);
    for (int i = 0; i < nt; ++i) workers[i] = i;
    int near_equal = 0;
    int near_one = 0;
    for (int d = 0; d < 10000; ++d) {
      auto flat = mixer::SampleMixRatios(workers, 1e5, {}, d, rng);
      auto peaked = mixer::SampleMixRatios(workers, 1e-3, {}, d, rng);
      if (!flat.ok() || !peaked.ok()) return {false, "sampling failed"};
      if (std::abs(flat->MaxRatio() - 1.0 / nt) <= 0.01) ++near_equal;
      if (peaked->MaxRatio() >= 0.99) ++near_one;
    }
    ok = ok && near_equal >= 9900 && near_one >= 9500;
    absl::StrAppend(&detail, absl::StrFormat("|N_t|=%d: %.2f%% near 1/|N_t|, %.2f%% >= 0.99; ",
                                             nt, near_equal / 100.0, near_one / 100.0));
  }
  const double t = Seconds(start);
  absl::StrAppend(&detail, absl::StrFormat("%.2f s", t));
  return {ok && t < 5.0, detail};
}

ExperimentConfig IrisConfig() {
  ExperimentConfig cfg;
  cfg.dataset.path = std::string(AIRMIX_DATA_DIR) + "/iris.csv";
  cfg.repetitions = 3;
  cfg.seed = 2024;
  return cfg;
}

ExperimentConfig PrivacyCell(double epsilon, double alpha) {
  ExperimentConfig cfg = IrisConfig();
  cfg.mode = BetaMode::kPrivacy;
  cfg.epsilon = epsilon;
  cfg.alpha = alpha;
  return cfg;
}

std::string Accuracies(const RunReport& r) {
  std::string s = "[";
  for (size_t i = 0; i < r.repetitions.size(); ++i) {
    absl::StrAppend(&s, i ? " " : "", absl::StrFormat("%.3f", r.repetitions[i].accuracy));
  }
  return s + "]";
}

std::vector<absl::StatusOr<RunReport>> RunAll(const std::vector<ExperimentConfig>& cfgs) {
  std::vector<std::future<absl::StatusOr<RunReport>>> futures;
  for (const auto& c : cfgs) {
    futures.push_back(std::async(std::launch::async, [c] { return RunExperiment(c); }));
  }
  std::vector<absl::StatusOr<RunReport>> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

struct Table1 {
  std::vector<ExperimentConfig> configs;
  std::vector<absl::StatusOr<RunReport>> reports;
};

Table1 RunTable1() {
  Table1 t;
  ExperimentConfig nonmix = IrisConfig();
  nonmix.policy = mixer::Policy::kNonMix;
  nonmix.mode = BetaMode::kMaxPower;
  t.configs = {nonmix, PrivacyCell(5, 1e5), PrivacyCell(5, 1), PrivacyCell(1e4, 1),
               PrivacyCell(1e4, 1e5)};
  // The second copy of the ε = 5 cell backs the determinism criterion.
  t.configs.push_back(PrivacyCell(5, 1e5));
  t.reports = RunAll(t.configs);
  return t;
}

std::vector<Outcome> Criterion6(const Table1& t) {
  for (const auto& r : t.reports) {
    if (!r.ok()) {
      return std::vector<Outcome>(4, {false, r.status().ToString()});
    }
  }
  double slowest = 0.0;
  for (const auto& r : t.reports) slowest = std::max(slowest, r->wall_clock_s);
  const bool fast = slowest < 300.0;
  const auto& nonmix = *t.reports[0];
  const auto& eps5_flat = *t.reports[1];
  const auto& eps5_peaked = *t.reports[2];
  const auto& eps1e4_peaked = *t.reports[3];
  const auto& eps1e4_flat = *t.reports[4];
  const std::string timing = absl::StrFormat(", slowest run %.1f s", slowest);
  std::vector<Outcome> out;
  out.push_back({fast && nonmix.MeanAccuracy() >= 0.95,
                 absl::StrFormat("NonMix max power mean acc %.3f %s (need >= 0.95)",
                                 nonmix.MeanAccuracy(), Accuracies(nonmix)) +
                     timing});
  out.push_back({fast && eps5_flat.MeanAccuracy() >= 0.80,
                 absl::StrFormat("eps=5 alpha=1e5 mean acc %.3f %s (need >= 0.80)",
                                 eps5_flat.MeanAccuracy(), Accuracies(eps5_flat))});
  out.push_back({fast && eps5_flat.MeanAccuracy() > eps5_peaked.MeanAccuracy(),
                 absl::StrFormat("eps=5: alpha=1e5 %.3f vs alpha=1 %.3f %s",
                                 eps5_flat.MeanAccuracy(), eps5_peaked.MeanAccuracy(),
                                 Accuracies(eps5_peaked))});
  out.push_back({fast && eps1e4_peaked.MeanAccuracy() > eps1e4_flat.MeanAccuracy(),
                 absl::StrFormat("eps=1e4: alpha=1 %.3f %s vs alpha=1e5 %.3f %s",
                                 eps1e4_peaked.MeanAccuracy(), Accuracies(eps1e4_peaked),
                                 eps1e4_flat.MeanAccuracy(), Accuracies(eps1e4_flat))});
  return out;
}

Outcome Criterion7() {
  const auto start = Clock::now();
  SweepGrid grid;
  grid.base = IrisConfig();
  grid.base.schedule_size = 4;
  grid.base.train_model = false;
  grid.epsilons = {5.0, 10.0, 100.0, 1e4};
  grid.alphas = {1.0, 10.0, 1e5};
  const auto rows = Sweep(grid);
  const double t = Seconds(start);
  // energy[e][a] in joules.
  double energy[4][3];
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].report.ok()) return {false, rows[i].report.status().ToString()};
    energy[i / 3][i % 3] = rows[i].report->MeanEnergy();
  }
  int violations = 0;
  for (int e = 0; e < 4; ++e) {
    for (int a = 0; a < 3; ++a) {
      if (e > 0 && !(energy[e - 1][a] < energy[e][a])) ++violations;
      if (a > 0 && !(energy[e][a - 1] < energy[e][a])) ++violations;
    }
  }
  const double corner_uj = energy[0][0] * 1e6;
  const bool in_band = corner_uj >= 0.0912 / 5 && corner_uj <= 0.0912 * 5;
  std::string table;
  for (int e = 0; e < 4; ++e) {
    absl::StrAppend(&table, e ? "; " : "",
                    absl::StrFormat("%.3g %.3g %.3g", energy[e][0] * 1e6,
                                    energy[e][1] * 1e6, energy[e][2] * 1e6));
  }
  return {violations == 0 && in_band && t < 120.0,
          absl::StrFormat("ordering violations %d, (eps=5, alpha=1) %.4f uJ "
                          "(band [%.4f, %.4f]), energies uJ [%s], %.1f s",
                          violations, corner_uj, 0.0912 / 5, 0.0912 * 5, table, t)};
}

Outcome Criterion8() {
  const auto start = Clock::now();
  ExperimentConfig base = IrisConfig();
  base.mode = BetaMode::kMaxPower;
  base.alpha = 5.0;
  base.channel.pathloss_exponent = 4.0;
  ExperimentConfig clear = base;
  clear.assignment = mixer::Assignment::kMaxMin;
  ExperimentConfig faded_maxmin = clear;
  faded_maxmin.channel.fading = {channel::FadingKind::kRayleigh, 0.0};
  ExperimentConfig faded_random = faded_maxmin;
  faded_random.assignment = mixer::Assignment::kRandom;
  const auto reports = RunAll({clear, faded_maxmin, faded_random});
  const double t = Seconds(start);
  for (const auto& r : reports) {
    if (!r.ok()) return {false, r.status().ToString()};
  }
  const double gap =
      std::abs(reports[1]->MeanAccuracy() - reports[0]->MeanAccuracy());
  const bool beta_smaller = reports[2]->MeanBeta() < reports[1]->MeanBeta();
  return {gap <= 0.05 && beta_smaller && t < 600.0,
          absl::StrFormat("no fading %.3f, Rayleigh+MaxMin %.3f (gap %.1f pp), "
                          "Rayleigh+Random %.3f; mean beta MaxMin %.3g vs Random %.3g, "
                          "%.1f s",
                          reports[0]->MeanAccuracy(), reports[1]->MeanAccuracy(),
                          100 * gap, reports[2]->MeanAccuracy(), reports[1]->MeanBeta(),
                          reports[2]->MeanBeta(), t)};
}

Outcome Criterion9() {
  const auto start = Clock::now();
  Rng rng = MakeRng(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    auto model = learner::InitModel({4, 32, 16, 3}, 900 + trial);
    if (!model.ok()) return {false, model.status().ToString()};
    Eigen::MatrixXd x(4, 4);
    Eigen::MatrixXd y(4, 3);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) x(i, j) = u(rng);
      for (int j = 0; j < 3; ++j) y(i, j) = u(rng);
      y.row(i) /= y.row(i).sum();
    }
    const learner::Gradients g = learner::ComputeGradients(*model, x, y);
    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = learner::CrossEntropy(*model, x, y);
      param = saved - h;
      const double down = learner::CrossEntropy(*model, x, y);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max(1e-6, std::abs(analytic) + std::abs(numeric)));
    };
    for (size_t l = 0; l < model->layers.size(); ++l) {
      auto& w = model->layers[l].weights;
      for (int i = 0; i < w.rows(); ++i) {
        for (int j = 0; j < w.cols(); ++j) check(w(i, j), g.layers[l].weights(i, j));
      }
      auto& b = model->layers[l].bias;
      for (int i = 0; i < b.size(); ++i) check(b(i), g.layers[l].bias(i));
    }
  }
  const double t = Seconds(start);
  return {worst <= 1e-4 && t < 5.0,
          absl::StrFormat("max relative gap %.3g, %.2f s", worst, t)};
}

Outcome Criterion10(const Table1& t) {
  const auto& a = t.reports[1];
  const auto& b = t.reports[5];
  if (!a.ok() || !b.ok()) return {false, "run failed"};
  bool same = a->repetitions.size() == b->repetitions.size();
  for (size_t i = 0; same && i < a->repetitions.size(); ++i) {
    const auto& x = a->repetitions[i];
    const auto& y = b->repetitions[i];
    same = x.accuracy == y.accuracy && x.energy_j == y.energy_j &&
           x.tight_epsilon == y.tight_epsilon && x.loose_epsilon == y.loose_epsilon;
  }
  return {same, absl::StrFormat("eps=5 alpha=1e5 config run twice, %zu repetitions %s",
                                a->repetitions.size(),
                                same ? "bit-identical" : "differ")};
}

int Report(const std::string& name, const Outcome& o) {
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

}  // namespace
}  // namespace airmix

int main() {
  using namespace airmix;
  int failures = 0;
  failures += Report("C1 beta/epsilon round trip", Criterion1());
  failures += Report("C2 tight <= loose, monotone in beta", Criterion2());
  failures += Report("C3 sensitivity brute force", Criterion3());
  failures += Report("C4 Monte-Carlo Renyi oracle", Criterion4());
  failures += Report("C5 Dirichlet limits", Criterion5());
  const Table1 table1 = RunTable1();
  const auto c6 = Criterion6(table1);
  failures += Report("C6a Iris NonMix max power", c6[0]);
  failures += Report("C6b Iris DirMix eps=5 alpha=1e5", c6[1]);
  failures += Report("C6c ordering at eps=5", c6[2]);
  failures += Report("C6d ordering at eps=1e4", c6[3]);
  failures += Report("C7 energy trends", Criterion7());
  failures += Report("C8 fading robustness", Criterion8());
  failures += Report("C9 gradient check", Criterion9());
  failures += Report("C10 determinism", Criterion10(table1));
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
