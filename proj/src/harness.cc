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

#include "airmix/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "airmix/channel.h"
#include "airmix/data.h"
#include "airmix/learner.h"
#include "airmix/round_log.h"

namespace airmix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::optional<uint64_t>& OverrideFor(const SeedOverrides& s,
                                           StreamTag tag) {
  static const std::optional<uint64_t> kNone;
  switch (tag) {
    case StreamTag::kPlacement:
      return s.placement;
    case StreamTag::kScheduling:
      return s.scheduling;
    case StreamTag::kMixing:
      return s.mixing;
    case StreamTag::kAssignment:
      return s.assignment;
    case StreamTag::kFading:
      return s.fading;
    case StreamTag::kNoise:
      return s.noise;
    case StreamTag::kDataSplit:
    case StreamTag::kDataAssign:
      return s.data;
    case StreamTag::kTraining:
      return s.training;
    case StreamTag::kRepetition:
      return kNone;
  }
  return kNone;
}

// Relative paths that do not exist from the working directory are retried
// under $AIRMIX_DATA_DIR.
std::string ResolveDataPath(const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return path;
  if (const char* dir = std::getenv("AIRMIX_DATA_DIR"); dir != nullptr) {
    for (const fs::path& candidate : {fs::path(dir) / p, fs::path(dir) / p.filename()}) {
      if (fs::exists(candidate)) return candidate.string();
    }
  }
  return path;
}

absl::StatusOr<data::LabeledDataset> LoadDataset(const ExperimentConfig& cfg,
                                                 int repetition) {
  if (cfg.dataset.kind == DatasetSource::Kind::kIris) {
    return data::LoadIris(ResolveDataPath(cfg.dataset.path));
  }
  Rng rng = MakeRng(StreamSeed(cfg, StreamTag::kDataSplit, repetition), 0);
  return data::SynthDataset(cfg.dataset.synthetic_rows,
                            cfg.dataset.synthetic_input_dim,
                            cfg.dataset.synthetic_label_dim,
                            cfg.dataset.synthetic_separation, rng);
}

struct Streams {
  uint64_t scheduling;
  uint64_t mixing;
  uint64_t assignment;
  uint64_t fading;
  uint64_t noise;
};

absl::StatusOr<double> SlotBeta(const ExperimentConfig& cfg,
                                const privacy::PrivacyBudget& target,
                                const mixer::MixRatioVector& ratios,
                                const channel::ChannelRealization& ch,
                                bool& silent, bool& power_limited) {
  silent = false;
  power_limited = false;
  auto cap = mixer::MaxPowerBeta(ratios, ch, cfg.PMaxWatts());
  if (!cap.ok()) return cap.status();
  if (cfg.mode == BetaMode::kMaxPower) return *cap;
  auto sol = privacy::SolveBeta(target, ratios.MaxSquared());
  if (!sol.ok()) return sol.status();
  if (sol->silent) {
    silent = true;
    return 0.0;
  }
  if (*cap < sol->beta) {
    power_limited = true;
    return *cap;
  }
  return sol->beta;
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json FiniteOrString(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

uint64_t StreamSeed(const ExperimentConfig& cfg, StreamTag tag, int repetition) {
  const uint64_t root = OverrideFor(cfg.seeds, tag).value_or(cfg.seed);
  const uint64_t base = DeriveSeed(root, tag);
  return DeriveSeed(base, StreamTag::kRepetition,
                    static_cast<uint64_t>(repetition));
}

privacy::PrivacyBudget BudgetFor(const ExperimentConfig& cfg, int input_dim,
                                 int label_dim, int64_t slots) {
  privacy::PrivacyBudget b;
  b.epsilon = cfg.epsilon;
  b.delta = cfg.delta;
  b.slots = slots;
  b.sampling_ratio = cfg.SamplingRatio();
  b.input_dim = input_dim;
  b.label_dim = label_dim;
  b.noise_power = cfg.channel.NoisePowerWatts();
  return b;
}

absl::StatusOr<PrivacyAudit> AuditPrivacy(const mixer::MixedDataset& log,
                                          const privacy::PrivacyBudget& budget,
                                          int max_order) {
  if (log.input_dim != budget.input_dim || log.label_dim != budget.label_dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "round log has dimensions ", log.input_dim, "+", log.label_dim,
        " but the budget expects ", budget.input_dim, "+", budget.label_dim));
  }
  if (budget.slots != static_cast<int64_t>(log.rounds.size())) {
    return absl::InvalidArgumentError(
        absl::StrCat("round log has ", log.rounds.size(),
                     " slots but the budget expects ", budget.slots));
  }
  std::vector<privacy::SlotRelease> slots;
  slots.reserve(log.rounds.size());
  for (const auto& r : log.rounds) slots.push_back({r.max_q_sq, r.beta});
  auto tight = privacy::ComputeTightEpsilon(budget, slots, max_order);
  if (!tight.ok()) return tight.status();
  auto loose = privacy::LooseEpsilon(budget, slots);
  if (!loose.ok()) return loose.status();
  PrivacyAudit out;
  out.tight_epsilon = tight->epsilon;
  out.order = tight->order;
  out.fell_back = tight->fell_back;
  out.loose_epsilon = *loose;
  return out;
}

absl::StatusOr<RepetitionTrace> RunRepetition(const ExperimentConfig& cfg,
                                              int repetition) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  auto dataset = LoadDataset(cfg, repetition);
  if (!dataset.ok()) return dataset.status();
  if (cfg.dataset.test_size >= dataset->size()) {
    return absl::InvalidArgumentError("test set would consume the whole dataset");
  }
  Rng split_rng = MakeRng(StreamSeed(cfg, StreamTag::kDataSplit, repetition), 1);
  auto split = data::StratifiedSplit(*dataset, cfg.dataset.test_size, split_rng);
  if (!split.ok()) return split.status();
  Rng assign_rng = MakeRng(StreamSeed(cfg, StreamTag::kDataAssign, repetition));
  const int pool = std::min(cfg.dataset.pool_size, split->train.size());
  auto workers = data::AssignToWorkers(split->train, cfg.n_workers, pool, assign_rng);
  if (!workers.ok()) return workers.status();

  Rng placement_rng = MakeRng(StreamSeed(cfg, StreamTag::kPlacement, repetition));
  auto field = channel::PlaceWorkers(cfg.n_workers, cfg.field_side_m, placement_rng);
  if (!field.ok()) return field.status();

  const Streams streams{StreamSeed(cfg, StreamTag::kScheduling, repetition),
                        StreamSeed(cfg, StreamTag::kMixing, repetition),
                        StreamSeed(cfg, StreamTag::kAssignment, repetition),
                        StreamSeed(cfg, StreamTag::kFading, repetition),
                        StreamSeed(cfg, StreamTag::kNoise, repetition)};
  const int dx = dataset->input_dim();
  const int dy = dataset->label_dim();
  const privacy::PrivacyBudget target = BudgetFor(cfg, dx, dy, cfg.slots);

  RepetitionTrace trace;
  RepetitionResult& res = trace.result;
  res.repetition = repetition;
  trace.rounds.input_dim = dx;
  trace.rounds.label_dim = dy;
  trace.rounds.rounds.reserve(static_cast<size_t>(cfg.slots));

  std::vector<int> population(cfg.n_workers);
  std::iota(population.begin(), population.end(), 0);
  std::vector<int> scheduled(cfg.schedule_size);
  std::vector<double> betas;
  betas.reserve(static_cast<size_t>(cfg.slots));
  for (int64_t t = 0; t < cfg.slots; ++t) {
    const auto slot = static_cast<uint64_t>(t);
    Rng sched_rng = MakeRng(streams.scheduling, slot);
    std::sample(population.begin(), population.end(), scheduled.begin(),
                cfg.schedule_size, sched_rng);

    Rng fading_rng = MakeRng(streams.fading, slot);
    auto ch = channel::SampleChannel(*field, cfg.channel, scheduled, t, fading_rng);
    if (!ch.ok()) return ch.status();

    Rng mix_rng = MakeRng(streams.mixing, slot);
    auto ratios = cfg.policy == mixer::Policy::kDirMix
                      ? mixer::SampleMixRatios(scheduled, cfg.alpha, {}, t, mix_rng)
                      : mixer::BaselineRatios(scheduled, cfg.policy, t, mix_rng);
    if (!ratios.ok()) return ratios.status();

    Rng perm_rng = MakeRng(streams.assignment, slot);
    auto assigned = mixer::AssignRatios(*ratios, *ch, cfg.assignment, perm_rng);
    if (!assigned.ok()) return assigned.status();

    bool silent = false;
    bool limited = false;
    auto beta = SlotBeta(cfg, target, *assigned, *ch, silent, limited);
    if (!beta.ok()) return beta.status();
    if (silent) {
      ++res.silent_slots;
      continue;
    }
    if (limited) ++res.power_limited_slots;

    auto alloc = mixer::AllocatePower(*assigned, *ch, *beta, cfg.policy);
    if (!alloc.ok()) return alloc.status();
    Rng noise_rng = MakeRng(streams.noise, slot);
    auto sample = mixer::TransmitRound(workers->bank, *alloc, *assigned, *ch,
                                       cfg.channel, noise_rng, cfg.slot_seconds);
    if (!sample.ok()) return sample.status();
    res.energy_j += sample->energy_joules;
    betas.push_back(*beta);
    trace.rounds.rounds.push_back(*std::move(sample));
  }
  res.released_slots = static_cast<int64_t>(trace.rounds.rounds.size());
  if (!betas.empty()) {
    res.beta_mean = Mean(betas);
    auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
    res.beta_min = *lo;
    res.beta_max = *hi;
  }

  // Energy is re-derived from the serialized log, not the in-memory rounds.
  std::stringstream log_text;
  WriteRoundLog(trace.rounds, log_text);
  auto reread = ReadRoundLog(log_text);
  if (!reread.ok()) return reread.status();
  res.energy_from_log_j = reread->TotalEnergy();

  if (cfg.channel.NoisePowerWatts() > 0.0) {
    auto audit = AuditPrivacy(*reread, BudgetFor(cfg, dx, dy, res.released_slots),
                              cfg.max_order);
    if (!audit.ok()) return audit.status();
    res.tight_epsilon = audit->tight_epsilon;
    res.tight_order = audit->order;
    res.loose_epsilon = audit->loose_epsilon;
  } else {
    res.tight_epsilon = std::numeric_limits<double>::infinity();
    res.loose_epsilon = std::numeric_limits<double>::infinity();
  }

  std::vector<int> sizes;
  sizes.push_back(dx);
  sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  sizes.push_back(dy);
  learner::TrainConfig train = cfg.train;
  train.seed = StreamSeed(cfg, StreamTag::kTraining, repetition);

  learner::ModelState model;
  if (trace.rounds.rounds.empty() || !cfg.train_model) {
    res.untrained = true;
    auto init = learner::InitModel(sizes, train.seed);
    if (!init.ok()) return init.status();
    model = *std::move(init);
  } else {
    auto trained = learner::Train(trace.rounds, train, sizes);
    if (!trained.ok()) return trained.status();
    model = std::move(trained->model);
    res.final_loss = std::move(trained->epoch_loss);
  }
  auto acc = learner::Evaluate(model, split->test.inputs, split->test.labels);
  if (!acc.ok()) return acc.status();
  res.accuracy = *acc;
  trace.model = std::move(model);
  return trace;
}

double RunReport::MeanAccuracy() const {
  std::vector<double> v;
  for (const auto& r : repetitions) v.push_back(r.accuracy);
  return Mean(v);
}

double RunReport::StdAccuracy() const {
  if (repetitions.empty()) return 0.0;
  const double m = MeanAccuracy();
  double ss = 0.0;
  for (const auto& r : repetitions) ss += (r.accuracy - m) * (r.accuracy - m);
  return std::sqrt(ss / static_cast<double>(repetitions.size()));
}

double RunReport::MeanEnergy() const {
  std::vector<double> v;
  for (const auto& r : repetitions) v.push_back(r.energy_j);
  return Mean(v);
}

double RunReport::MeanBeta() const {
  std::vector<double> v;
  for (const auto& r : repetitions) v.push_back(r.beta_mean);
  return Mean(v);
}

bool RunReport::PowerLimited() const {
  return std::any_of(repetitions.begin(), repetitions.end(),
                     [](const auto& r) { return r.power_limited_slots > 0; });
}

bool RunReport::Untrained() const {
  return std::any_of(repetitions.begin(), repetitions.end(),
                     [](const auto& r) { return r.untrained; });
}

absl::StatusOr<RunReport> RunExperiment(const ExperimentConfig& cfg,
                                        const RunOptions& options) {
  if (auto s = cfg.Validate(); !s.ok()) return s;
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  if (!options.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(options.output_dir, ec);
    if (ec) {
      return absl::InternalError(
          absl::StrCat("cannot create ", options.output_dir, ": ", ec.message()));
    }
  }
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    auto trace = RunRepetition(cfg, rep);
    if (!trace.ok()) return trace.status();
    if (!options.output_dir.empty()) {
      const fs::path dir(options.output_dir);
      auto s = WriteRoundLog(trace->rounds,
                             (dir / absl::StrCat("round_log_rep", rep, ".csv")).string());
      if (!s.ok()) return s;
      s = learner::SaveCheckpoint(
          trace->model, (dir / absl::StrCat("model_rep", rep, ".json")).string());
      if (!s.ok()) return s;
    }
    report.repetitions.push_back(std::move(trace->result));
  }
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (!options.output_dir.empty()) {
    const fs::path path = fs::path(options.output_dir) / "run_summary.json";
    std::ofstream out(path);
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", path.string()));
    out << ReportToJson(report).dump(2) << "\n";
  }
  return report;
}

json ReportToJson(const RunReport& report) {
  json reps = json::array();
  for (const auto& r : report.repetitions) {
    reps.push_back({{"repetition", r.repetition},
                    {"accuracy", r.accuracy},
                    {"energy_j", r.energy_j},
                    {"energy_from_log_j", r.energy_from_log_j},
                    {"tight_epsilon", FiniteOrString(r.tight_epsilon)},
                    {"tight_order", r.tight_order},
                    {"loose_epsilon", FiniteOrString(r.loose_epsilon)},
                    {"beta_mean", r.beta_mean},
                    {"beta_min", r.beta_min},
                    {"beta_max", r.beta_max},
                    {"released_slots", r.released_slots},
                    {"silent_slots", r.silent_slots},
                    {"power_limited_slots", r.power_limited_slots},
                    {"untrained", r.untrained}});
  }
  return {{"config", ConfigToJson(report.config)},
          {"repetitions", reps},
          {"mean_accuracy", report.MeanAccuracy()},
          {"std_accuracy", report.StdAccuracy()},
          {"mean_energy_j", report.MeanEnergy()},
          {"mean_beta", report.MeanBeta()},
          {"power_limited", report.PowerLimited()},
          {"untrained", report.Untrained()},
          {"wall_clock_s", report.wall_clock_s}};
}

std::vector<ExperimentConfig> SweepGrid::Cells() const {
  auto or_base = [](const auto& axis, auto base) {
    using T = std::decay_t<decltype(base)>;
    return axis.empty() ? std::vector<T>{base} : std::vector<T>(axis.begin(), axis.end());
  };
  const std::optional<double> base_eps =
      base.mode == BetaMode::kPrivacy ? std::optional<double>(base.epsilon)
                                      : std::nullopt;
  std::vector<ExperimentConfig> cells;
  for (const auto& eps : or_base(epsilons, base_eps)) {
    for (double delta : or_base(deltas, base.delta)) {
      for (double alpha : or_base(alphas, base.alpha)) {
        for (int nt : or_base(schedule_sizes, base.schedule_size)) {
          for (auto policy : or_base(policies, base.policy)) {
            for (auto assignment : or_base(assignments, base.assignment)) {
              ExperimentConfig c = base;
              if (eps) {
                c.mode = BetaMode::kPrivacy;
                c.epsilon = *eps;
              } else {
                c.mode = BetaMode::kMaxPower;
              }
              c.delta = delta;
              c.alpha = alpha;
              c.schedule_size = nt;
              c.policy = policy;
              c.assignment = assignment;
              cells.push_back(std::move(c));
            }
          }
        }
      }
    }
  }
  return cells;
}

absl::StatusOr<SweepGrid> SweepGridFromJson(const json& j) {
  SweepGrid grid;
  if (!j.is_object()) return absl::InvalidArgumentError("grid must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "base") {
        auto base = ConfigFromJson(value);
        if (!base.ok()) return base.status();
        grid.base = *std::move(base);
      } else if (key == "epsilon") {
        for (const auto& e : value) {
          if (e.is_string() && e.get<std::string>() == "max_power") {
            grid.epsilons.push_back(std::nullopt);
          } else {
            grid.epsilons.push_back(e.get<double>());
          }
        }
      } else if (key == "delta") {
        grid.deltas = value.get<std::vector<double>>();
      } else if (key == "alpha") {
        grid.alphas = value.get<std::vector<double>>();
      } else if (key == "schedule_size") {
        grid.schedule_sizes = value.get<std::vector<int>>();
      } else if (key == "policy") {
        for (const auto& p : value) {
          auto parsed = mixer::ParsePolicy(p.get<std::string>());
          if (!parsed.ok()) return parsed.status();
          grid.policies.push_back(*parsed);
        }
      } else if (key == "assignment") {
        for (const auto& a : value) {
          auto parsed = mixer::ParseAssignment(a.get<std::string>());
          if (!parsed.ok()) return parsed.status();
          grid.assignments.push_back(*parsed);
        }
      } else if (key == "parallelism") {
        grid.parallelism = value.get<int>();
      } else {
        return absl::InvalidArgumentError(absl::StrCat("unknown grid key '", key, "'"));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad grid: ", e.what()));
  }
  return grid;
}

absl::StatusOr<SweepGrid> LoadSweepGrid(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("cannot parse ", path, ": ", e.what()));
  }
  auto grid = SweepGridFromJson(j);
  if (!grid.ok()) return grid.status();
  const fs::path data_path(grid->base.dataset.path);
  if (data_path.is_relative()) {
    const fs::path beside = fs::path(path).parent_path() / data_path;
    if (fs::exists(beside)) grid->base.dataset.path = beside.string();
  }
  return grid;
}

std::vector<SweepRow> Sweep(const SweepGrid& grid) {
  const auto cells = grid.Cells();
  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) {
    rows.push_back({c, absl::UnknownError("not run")});
  }
  int workers = grid.parallelism > 0
                    ? grid.parallelism
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(cells.size()));
  // Each worker thread takes cells in a fixed stride so that results land in
  // their grid position regardless of scheduling.
  std::vector<std::future<void>> futures;
  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&rows, w, workers] {
      for (size_t i = static_cast<size_t>(w); i < rows.size();
           i += static_cast<size_t>(workers)) {
        rows[i].report = RunExperiment(rows[i].config);
      }
    }));
  }
  for (auto& f : futures) f.get();
  return rows;
}

void WriteSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "epsilon,delta,alpha,schedule_size,policy,assignment,mean_accuracy,"
         "std_accuracy,mean_energy_j,status\n";
  for (const auto& row : rows) {
    const auto& c = row.config;
    const std::string eps = c.mode == BetaMode::kPrivacy
                                ? absl::StrFormat("%.17g", c.epsilon)
                                : std::string("max_power");
    out << eps << absl::StrFormat(",%.17g,%.17g,%d,", c.delta, c.alpha,
                                  c.schedule_size)
        << mixer::PolicyName(c.policy) << ","
        << mixer::AssignmentName(c.assignment) << ",";
    if (row.report.ok()) {
      out << absl::StrFormat("%.17g,%.17g,%.17g,ok\n", row.report->MeanAccuracy(),
                             row.report->StdAccuracy(), row.report->MeanEnergy());
    } else {
      std::string msg(row.report.status().message());
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,," << "error: " << msg << "\n";
    }
  }
}

}  // namespace airmix
