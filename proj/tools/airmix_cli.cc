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

// Command-line front end: run, sweep, accountant, solve-beta.
//
// Output files go to --output-dir, else $AIRMIX_OUTPUT_DIR, else ./airmix_out.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "airmix/channel.h"
#include "airmix/config.h"
#include "airmix/harness.h"
#include "airmix/mixer.h"
#include "airmix/privacy.h"
#include "airmix/rng.h"
#include "airmix/round_log.h"
#include "json.hpp"

namespace {

using nlohmann::json;

std::string OutputDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AIRMIX_OUTPUT_DIR"); env && *env) return env;
  return "airmix_out";
}

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return 1;
}

json Num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

struct BudgetFlags {
  double epsilon = 5.0;
  double delta = 0.01;
  int64_t slots = 1000;
  double sampling_ratio = 8.0 / 2000.0;
  int input_dim = 4;
  int label_dim = 3;
  double noise_dbm = -114.0;

  void Register(CLI::App* app, bool with_epsilon) {
    if (with_epsilon) app->add_option("--epsilon", epsilon, "Target epsilon");
    app->add_option("--delta", delta, "Target delta");
    app->add_option("--slots", slots, "Number of released slots T");
    app->add_option("--sampling-ratio", sampling_ratio, "Scheduled fraction r");
    app->add_option("--input-dim", input_dim, "Input dimension");
    app->add_option("--label-dim", label_dim, "Label dimension");
    app->add_option("--noise-dbm", noise_dbm, "Receiver noise power in dBm");
  }

  airmix::privacy::PrivacyBudget Budget() const {
    airmix::privacy::PrivacyBudget b;
    b.epsilon = epsilon;
    b.delta = delta;
    b.slots = slots;
    b.sampling_ratio = sampling_ratio;
    b.input_dim = input_dim;
    b.label_dim = label_dim;
    b.noise_power = airmix::channel::DbmToWatts(noise_dbm);
    return b;
  }
};

// Mean of max_i q_i^2 over Dirichlet draws with uniform prior.
absl::StatusOr<double> MeanMaxSquared(double alpha, int schedule_size,
                                      int draws, uint64_t seed) {
  std::vector<int> workers(schedule_size);
  std::iota(workers.begin(), workers.end(), 0);
  airmix::Rng rng = airmix::MakeRng(seed);
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    auto q = airmix::mixer::SampleMixRatios(workers, alpha, {}, i, rng);
    if (!q.ok()) return q.status();
    sum += q->MaxSquared();
  }
  return sum / draws;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private over-the-air mixup simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_path;
  std::string output_flag;
  std::optional<uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)");
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--output-dir", output_flag, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("--grid", grid_path, "Sweep grid (JSON)")->required();
  sweep->add_option("--seed", seed, "Master seed override");
  sweep->add_option("--output-dir", output_flag, "Output directory");

  BudgetFlags acct_flags;
  std::optional<double> beta;
  std::optional<double> max_q_sq;
  std::optional<double> alpha;
  int schedule_size = 8;
  int mc_draws = 10000;
  std::string round_log;
  int max_order = airmix::privacy::kMaxOrder;
  auto* acct = app.add_subcommand(
      "accountant",
      "Tight and loose epsilon for a beta (solved from --epsilon when absent) "
      "or a round log");
  acct_flags.Register(acct, /*with_epsilon=*/true);
  acct->add_option("--beta", beta, "Power scaling factor shared by all slots");
  acct->add_option("--max-q-sq", max_q_sq, "Per-slot max squared mixing ratio");
  acct->add_option("--alpha", alpha,
                   "Dirichlet concentration; max q^2 is averaged by Monte Carlo");
  acct->add_option("--schedule-size", schedule_size, "Workers per slot");
  acct->add_option("--draws", mc_draws, "Monte Carlo draws for --alpha");
  acct->add_option("--round-log", round_log, "Audit a round log instead");
  acct->add_option("--max-order", max_order, "Largest Renyi order");
  acct->add_option("--seed", seed, "Seed for the Monte Carlo draws");

  BudgetFlags solve_flags;
  double solve_q_sq = 1.0 / 64.0;
  auto* solve = app.add_subcommand("solve-beta",
                                   "Largest beta meeting an epsilon target");
  solve_flags.Register(solve, /*with_epsilon=*/true);
  solve->add_option("--max-q-sq", solve_q_sq, "Max squared mixing ratio");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    airmix::ExperimentConfig cfg;
    if (!config_path.empty()) {
      auto loaded = airmix::LoadConfig(config_path);
      if (!loaded.ok()) return Fail(loaded.status());
      cfg = *loaded;
    }
    if (seed) cfg.seed = *seed;
    const std::string dir = OutputDir(output_flag);
    auto report = airmix::RunExperiment(cfg, {dir});
    if (!report.ok()) return Fail(report.status());
    json summary = airmix::ReportToJson(*report);
    summary.erase("config");
    std::cout << summary.dump(2) << "\n";
    std::cerr << "wrote " << (std::filesystem::path(dir) / "run_summary.json").string()
              << "\n";
    return 0;
  }

  if (sweep->parsed()) {
    auto grid = airmix::LoadSweepGrid(grid_path);
    if (!grid.ok()) return Fail(grid.status());
    if (seed) grid->base.seed = *seed;
    const auto rows = airmix::Sweep(*grid);
    const std::filesystem::path dir(OutputDir(output_flag));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return Fail(absl::InternalError(ec.message()));
    const auto csv_path = dir / "sweep.csv";
    std::ofstream out(csv_path);
    if (!out) return Fail(absl::InternalError("cannot write " + csv_path.string()));
    airmix::WriteSweepCsv(rows, out);
    airmix::WriteSweepCsv(rows, std::cout);
    std::cerr << "wrote " << csv_path.string() << "\n";
    return 0;
  }

  if (acct->parsed()) {
    airmix::privacy::PrivacyBudget budget = acct_flags.Budget();
    std::vector<airmix::privacy::SlotRelease> slots;
    json out;
    if (!round_log.empty()) {
      auto log = airmix::ReadRoundLog(round_log);
      if (!log.ok()) return Fail(log.status());
      budget.input_dim = log->input_dim;
      budget.label_dim = log->label_dim;
      budget.slots = static_cast<int64_t>(log->rounds.size());
      for (const auto& r : log->rounds) slots.push_back({r.max_q_sq, r.beta});
    } else {
      double q_sq = 1.0 / (static_cast<double>(schedule_size) * schedule_size);
      if (max_q_sq) {
        q_sq = *max_q_sq;
      } else if (alpha) {
        auto mean = MeanMaxSquared(*alpha, schedule_size, mc_draws, seed.value_or(1));
        if (!mean.ok()) return Fail(mean.status());
        q_sq = *mean;
      }
      out["max_q_sq"] = q_sq;
      if (!beta) {
        auto sol = airmix::privacy::SolveBeta(budget, q_sq);
        if (!sol.ok()) return Fail(sol.status());
        out["silent"] = sol->silent;
        out["exponential_arm"] = sol->exponential_arm;
        if (sol->silent) {
          out["beta"] = 0.0;
          std::cout << out.dump(2) << "\n";
          return 0;
        }
        beta = sol->beta;
      }
      out["beta"] = *beta;
      slots.assign(static_cast<size_t>(budget.slots), {q_sq, *beta});
    }
    auto tight = airmix::privacy::ComputeTightEpsilon(budget, slots, max_order);
    if (!tight.ok()) return Fail(tight.status());
    auto loose = airmix::privacy::LooseEpsilon(budget, slots);
    if (!loose.ok()) return Fail(loose.status());
    out["slots"] = budget.slots;
    out["tight_epsilon"] = Num(tight->epsilon);
    out["order"] = tight->order;
    out["loose_epsilon"] = Num(*loose);
    out["failed_orders"] = tight->failed_orders;
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (solve->parsed()) {
    auto sol = airmix::privacy::SolveBeta(solve_flags.Budget(), solve_q_sq);
    if (!sol.ok()) return Fail(sol.status());
    json out = {{"beta", sol->beta},
                {"silent", sol->silent},
                {"exponential_arm", sol->exponential_arm}};
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  return 0;
}
