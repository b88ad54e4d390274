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

#include "airmix/mixer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "airmix/channel.h"
#include "airmix/rng.h"
#include "gtest/gtest.h"

namespace airmix::mixer {
namespace {

std::vector<int> Workers(int n) {
  std::vector<int> w(n);
  std::iota(w.begin(), w.end(), 0);
  return w;
}

MixRatioVector Ratios(std::vector<double> q) {
  MixRatioVector r;
  r.workers = Workers(static_cast<int>(q.size()));
  r.ratios = std::move(q);
  return r;
}

channel::ChannelRealization Channel(std::vector<double> h) {
  channel::ChannelRealization c;
  c.workers = Workers(static_cast<int>(h.size()));
  c.magnitudes = std::move(h);
  return c;
}

channel::ChannelConfig Noiseless() {
  channel::ChannelConfig cfg;
  cfg.noise_power_dbm = -std::numeric_limits<double>::infinity();
  return cfg;
}

TEST(DirichletTest, SingleWorkerIsDegenerate) {
  Rng rng = MakeRng(1);
  auto q = SampleMixRatios(Workers(1), 0.5, {}, 0, rng);
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(q->ratios, std::vector<double>{1.0});
}

TEST(DirichletTest, RatiosLieOnTheSimplex) {
  Rng rng = MakeRng(2);
  for (double alpha : {1e-3, 0.1, 1.0, 10.0, 1e5}) {
    for (int i = 0; i < 200; ++i) {
      auto q = SampleMixRatios(Workers(6), alpha, {}, i, rng);
      ASSERT_TRUE(q.ok());
      double sum = 0.0;
      for (double v : q->ratios) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_EQ(q->prior.size(), 6u);
    }
  }
}

TEST(DirichletTest, MarginalMeanMatchesPrior) {
  Rng rng = MakeRng(3);
  const std::vector<double> prior = {0.5, 0.3, 0.2};
  std::vector<double> mean(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto q = SampleMixRatios(Workers(3), 2.0, prior, i, rng);
    ASSERT_TRUE(q.ok());
    for (int k = 0; k < 3; ++k) mean[k] += q->ratios[k] / n;
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(mean[k], prior[k], 0.005);
}

TEST(DirichletTest, LargeAlphaConcentratesAtUniform) {
  Rng rng = MakeRng(4);
  int inside = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto q = SampleMixRatios(Workers(8), 1e5, {}, i, rng);
    ASSERT_TRUE(q.ok());
    const double m = q->MaxRatio();
    inside += (m >= 0.120 && m <= 0.130);
  }
  EXPECT_GE(inside, 0.99 * n);
}

TEST(DirichletTest, TinyAlphaIsNearlyOneHot) {
  Rng rng = MakeRng(5);
  int one_hot = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto q = SampleMixRatios(Workers(4), 1e-3, {}, i, rng);
    ASSERT_TRUE(q.ok());
    one_hot += q->MaxRatio() >= 0.99;
  }
  EXPECT_GE(one_hot, 0.95 * n);
}

TEST(DirichletTest, RejectsBadArguments) {
  Rng rng = MakeRng(6);
  EXPECT_FALSE(SampleMixRatios(Workers(3), 0.0, {}, 0, rng).ok());
  EXPECT_FALSE(SampleMixRatios(Workers(3), -1.0, {}, 0, rng).ok());
  EXPECT_FALSE(SampleMixRatios({}, 1.0, {}, 0, rng).ok());
  const std::vector<double> bad_prior = {0.5, 0.6, -0.1};
  EXPECT_FALSE(SampleMixRatios(Workers(3), 1.0, bad_prior, 0, rng).ok());
  const std::vector<double> short_prior = {1.0};
  EXPECT_FALSE(SampleMixRatios(Workers(3), 1.0, short_prior, 0, rng).ok());
}

TEST(BaselineTest, EqualMixIsUniform) {
  Rng rng = MakeRng(7);
  auto q = BaselineRatios(Workers(4), Policy::kEqualMix, 0, rng);
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(q->ratios, (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
}

TEST(BaselineTest, NonMixIsOneHot) {
  Rng rng = MakeRng(8);
  std::vector<int> hits(4, 0);
  for (int i = 0; i < 4000; ++i) {
    auto q = BaselineRatios(Workers(4), Policy::kNonMix, i, rng);
    ASSERT_TRUE(q.ok());
    auto sorted = q->ratios;
    std::sort(sorted.begin(), sorted.end());
    ASSERT_EQ(sorted, (std::vector<double>{0.0, 0.0, 0.0, 1.0}));
    ++hits[std::max_element(q->ratios.begin(), q->ratios.end()) - q->ratios.begin()];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(BaselineTest, NonMixSingleWorker) {
  Rng rng = MakeRng(9);
  auto q = BaselineRatios(Workers(1), Policy::kNonMix, 0, rng);
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(q->ratios, std::vector<double>{1.0});
}

TEST(AssignTest, MaxMinGivesLargestRatioToStrongestChannel) {
  Rng rng = MakeRng(10);
  auto a = AssignRatios(Ratios({0.9, 0.1}), Channel({0.001, 1.0}), Assignment::kMaxMin, rng);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->ratios, (std::vector<double>{0.1, 0.9}));
}

double BestPermutationObjective(std::vector<double> q, const std::vector<double>& h) {
  std::sort(q.begin(), q.end());
  double best = -1.0;
  do {
    best = std::max(best, MaxMinObjective(q, h));
  } while (std::next_permutation(q.begin(), q.end()));
  return best;
}

TEST(AssignTest, MaxMinMatchesBruteForceOnThreeWorkers) {
  Rng rng = MakeRng(11);
  const std::vector<double> h = {3.0, 2.0, 1.0};
  auto a = AssignRatios(Ratios({0.2, 0.5, 0.3}), Channel(h), Assignment::kMaxMin, rng);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->ratios, (std::vector<double>{0.5, 0.3, 0.2}));
  EXPECT_DOUBLE_EQ(MaxMinObjective(a->ratios, h),
                   BestPermutationObjective({0.5, 0.3, 0.2}, h));
}

TEST(AssignTest, MaxMinMatchesBruteForceOnRandomInstances) {
  Rng rng = MakeRng(12);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    auto q = SampleMixRatios(Workers(n), 0.7, {}, trial, rng);
    ASSERT_TRUE(q.ok());
    std::vector<double> h(n);
    for (double& v : h) v = u(rng);
    auto a = AssignRatios(*q, Channel(h), Assignment::kMaxMin, rng);
    ASSERT_TRUE(a.ok());
    EXPECT_DOUBLE_EQ(MaxMinObjective(a->ratios, h),
                     BestPermutationObjective(q->ratios, h));
  }
}

TEST(AssignTest, EqualChannelsMakeObjectivePermutationInvariant) {
  Rng rng = MakeRng(13);
  const std::vector<double> h(4, 0.5);
  std::vector<double> q = {0.1, 0.2, 0.3, 0.4};
  const double ref = MaxMinObjective(q, h);
  do {
    EXPECT_DOUBLE_EQ(MaxMinObjective(q, h), ref);
  } while (std::next_permutation(q.begin(), q.end()));
}

TEST(AssignTest, RandomAssignmentIsAPermutation) {
  Rng rng = MakeRng(14);
  const auto q = Ratios({0.1, 0.2, 0.3, 0.4});
  for (int i = 0; i < 50; ++i) {
    auto a = AssignRatios(q, Channel({1, 1, 1, 1}), Assignment::kRandom, rng);
    ASSERT_TRUE(a.ok());
    auto sorted = a->ratios;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, q.ratios);
  }
}

TEST(AssignTest, MismatchedWorkersIsAnError) {
  Rng rng = MakeRng(15);
  auto c = Channel({1.0, 1.0});
  c.workers = {0, 5};
  EXPECT_FALSE(AssignRatios(Ratios({0.5, 0.5}), c, Assignment::kMaxMin, rng).ok());
}

TEST(MaxPowerBetaTest, SingleWorker) {
  auto beta = MaxPowerBeta(Ratios({1.0}), Channel({0.1}), 0.2);
  ASSERT_TRUE(beta.ok());
  EXPECT_NEAR(*beta, 0.002, 1e-15);
}

TEST(MaxPowerBetaTest, EqualTerms) {
  auto beta = MaxPowerBeta(Ratios({0.5, 0.5}), Channel({1.0, 1.0}), 1.0);
  ASSERT_TRUE(beta.ok());
  EXPECT_DOUBLE_EQ(*beta, 4.0);
}

TEST(MaxPowerBetaTest, ZeroRatioWorkerIsSkipped) {
  const auto q = Ratios({0.0, 1.0});
  const auto h = Channel({1e-9, 0.1});
  auto beta = MaxPowerBeta(q, h, 0.2);
  ASSERT_TRUE(beta.ok());
  EXPECT_NEAR(*beta, 0.002, 1e-15);
  auto alloc = AllocatePower(q, h, *beta, Policy::kNonMix);
  ASSERT_TRUE(alloc.ok());
  EXPECT_EQ(alloc->powers[0], 0.0);
}

TEST(MaxPowerBetaTest, AllZeroRatiosIsAnError) {
  EXPECT_FALSE(MaxPowerBeta(Ratios({0.0, 0.0}), Channel({1.0, 1.0}), 1.0).ok());
}

TEST(MaxPowerBetaTest, PeakPowerEqualsCap) {
  Rng rng = MakeRng(16);
  std::uniform_real_distribution<double> u(1e-6, 1e-3);
  for (int trial = 0; trial < 100; ++trial) {
    auto q = SampleMixRatios(Workers(8), 1.0, {}, trial, rng);
    ASSERT_TRUE(q.ok());
    std::vector<double> h(8);
    for (double& v : h) v = u(rng);
    auto beta = MaxPowerBeta(*q, Channel(h), 0.2);
    ASSERT_TRUE(beta.ok());
    auto alloc = AllocatePower(*q, Channel(h), *beta, Policy::kDirMix);
    ASSERT_TRUE(alloc.ok());
    EXPECT_NEAR(alloc->MaxPower(), 0.2, 1e-12);
  }
}

TEST(AllocateTest, ChannelInversionConsistency) {
  Rng rng = MakeRng(17);
  std::uniform_real_distribution<double> u(1e-7, 1e-2);
  for (int trial = 0; trial < 100; ++trial) {
    auto q = SampleMixRatios(Workers(5), 3.0, {}, trial, rng);
    ASSERT_TRUE(q.ok());
    std::vector<double> h(5);
    for (double& v : h) v = u(rng);
    const double beta = 1e-9 * (1 + trial);
    auto alloc = AllocatePower(*q, Channel(h), beta, Policy::kDirMix);
    ASSERT_TRUE(alloc.ok());
    for (int i = 0; i < 5; ++i) {
      const double lhs = std::sqrt(alloc->powers[i]) * h[i];
      const double rhs = std::sqrt(beta) * q->ratios[i];
      EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
      EXPECT_NEAR(alloc->powers[i], beta * q->ratios[i] * q->ratios[i] / (h[i] * h[i]),
                  1e-12 * alloc->powers[i]);
    }
  }
}

TEST(AllocateTest, NegativeBetaIsAnError) {
  EXPECT_FALSE(AllocatePower(Ratios({1.0}), Channel({1.0}), -1.0, Policy::kNonMix).ok());
}

TEST(SampleBankTest, ValidatesInputsAndLabels) {
  EXPECT_TRUE(SampleBank::Create({{0.0, 1.0}}, {{0.0, 1.0}}).ok());
  EXPECT_FALSE(SampleBank::Create({{1.5, 0.0}}, {{0.0, 1.0}}).ok());
  EXPECT_FALSE(SampleBank::Create({{0.5, 0.0}}, {{0.5, 0.5}}).ok());
  EXPECT_FALSE(SampleBank::Create({{0.5, 0.0}}, {{0.0, 1.0}, {1.0, 0.0}}).ok());
  EXPECT_FALSE(SampleBank::Create({{0.5, 0.0}, {0.5}}, {{0.0, 1.0}, {1.0, 0.0}}).ok());
}

TEST(TransmitTest, NoiselessEqualMix) {
  auto bank = SampleBank::Create({{0, 0, 0, 0}, {1, 1, 1, 1}}, {{1, 0, 0}, {0, 0, 1}});
  ASSERT_TRUE(bank.ok());
  const auto q = Ratios({0.5, 0.5});
  const auto h = Channel({1e-3, 2e-4});
  auto alloc = AllocatePower(q, h, 1e-6, Policy::kEqualMix);
  ASSERT_TRUE(alloc.ok());
  Rng rng = MakeRng(18);
  auto s = TransmitRound(*bank, *alloc, q, h, Noiseless(), rng);
  ASSERT_TRUE(s.ok());
  for (double v : s->input_mix) EXPECT_NEAR(v, 0.5, 1e-12);
  EXPECT_NEAR(s->label_mix[0], 0.5, 1e-12);
  EXPECT_NEAR(s->label_mix[1], 0.0, 1e-12);
  EXPECT_NEAR(s->label_mix[2], 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(s->b_t, 1e-3);
  EXPECT_DOUBLE_EQ(s->max_q_sq, 0.25);
}

TEST(TransmitTest, NoiselessNonMixReturnsRawSample) {
  auto bank = SampleBank::Create({{0.1, 0.2}, {0.7, 0.9}, {0.3, 0.3}},
                                 {{1, 0}, {0, 1}, {1, 0}});
  ASSERT_TRUE(bank.ok());
  const auto q = Ratios({0.0, 1.0, 0.0});
  const auto h = Channel({1e-4, 3e-5, 2e-3});
  auto beta = MaxPowerBeta(q, h, 0.2);
  ASSERT_TRUE(beta.ok());
  auto alloc = AllocatePower(q, h, *beta, Policy::kNonMix);
  ASSERT_TRUE(alloc.ok());
  Rng rng = MakeRng(19);
  auto s = TransmitRound(*bank, *alloc, q, h, Noiseless(), rng);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s->input_mix[0], 0.7, 1e-12);
  EXPECT_NEAR(s->input_mix[1], 0.9, 1e-12);
  EXPECT_NEAR(s->label_mix[0], 0.0, 1e-12);
  EXPECT_NEAR(s->label_mix[1], 1.0, 1e-12);
}

TEST(TransmitTest, HalvingBetaScalesNoiseBySqrtTwo) {
  auto bank = SampleBank::Create({{0.2, 0.4}, {0.6, 0.8}}, {{1, 0}, {0, 1}});
  ASSERT_TRUE(bank.ok());
  const auto q = Ratios({0.3, 0.7});
  const auto h = Channel({1e-4, 5e-5});
  const channel::ChannelConfig noisy;
  const double beta = 1e-13;
  std::vector<double> clean = {0.3 * 0.2 + 0.7 * 0.6, 0.3 * 0.4 + 0.7 * 0.8, 0.3, 0.7};
  std::vector<std::vector<double>> noise;
  for (double b : {beta, beta / 2}) {
    auto alloc = AllocatePower(q, h, b, Policy::kDirMix);
    ASSERT_TRUE(alloc.ok());
    Rng rng = MakeRng(20);
    auto s = TransmitRound(*bank, *alloc, q, h, noisy, rng);
    ASSERT_TRUE(s.ok());
    std::vector<double> n;
    for (int d = 0; d < 2; ++d) n.push_back(s->input_mix[d] - clean[d]);
    for (int d = 0; d < 2; ++d) n.push_back(s->label_mix[d] - clean[2 + d]);
    noise.push_back(n);
  }
  for (int d = 0; d < 4; ++d) {
    EXPECT_NEAR(noise[1][d] / noise[0][d], std::sqrt(2.0), 1e-6);
  }
}

TEST(TransmitTest, EnergyIdentity) {
  Rng rng = MakeRng(21);
  auto bank = SampleBank::Create({{0, 0}, {1, 1}, {0, 1}, {1, 0}},
                                 {{1, 0}, {0, 1}, {1, 0}, {0, 1}});
  ASSERT_TRUE(bank.ok());
  std::uniform_real_distribution<double> u(1e-6, 1e-3);
  MixedDataset ds;
  double expected_total = 0.0;
  for (int t = 0; t < 20; ++t) {
    auto q = SampleMixRatios(Workers(4), 1.0, {}, t, rng);
    ASSERT_TRUE(q.ok());
    std::vector<double> hv(4);
    for (double& v : hv) v = u(rng);
    const auto h = Channel(hv);
    auto beta = MaxPowerBeta(*q, h, 0.2);
    ASSERT_TRUE(beta.ok());
    auto alloc = AllocatePower(*q, h, *beta, Policy::kDirMix);
    ASSERT_TRUE(alloc.ok());
    auto s = TransmitRound(*bank, *alloc, *q, h, channel::ChannelConfig(), rng);
    ASSERT_TRUE(s.ok());
    double direct = 0.0;
    for (int i = 0; i < 4; ++i) direct += q->ratios[i] * q->ratios[i] / (hv[i] * hv[i]);
    direct *= kDefaultSlotSeconds * *beta;
    EXPECT_NEAR(s->energy_joules, direct, 1e-12 * direct);
    expected_total += direct;
    ds.rounds.push_back(*s);
  }
  EXPECT_NEAR(ds.TotalEnergy(), expected_total, 1e-12 * expected_total);
}

TEST(TransmitTest, ZeroBetaIsAnError) {
  auto bank = SampleBank::Create({{0.5}}, {{1.0}});
  ASSERT_TRUE(bank.ok());
  const auto q = Ratios({1.0});
  const auto h = Channel({1e-3});
  auto alloc = AllocatePower(q, h, 0.0, Policy::kNonMix);
  ASSERT_TRUE(alloc.ok());
  Rng rng = MakeRng(22);
  EXPECT_FALSE(TransmitRound(*bank, *alloc, q, h, Noiseless(), rng).ok());
}

TEST(NamesTest, RoundTrip) {
  for (Policy p : {Policy::kDirMix, Policy::kNonMix, Policy::kEqualMix}) {
    auto parsed = ParsePolicy(PolicyName(p));
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, p);
  }
  for (Assignment a : {Assignment::kRandom, Assignment::kMaxMin}) {
    auto parsed = ParseAssignment(AssignmentName(a));
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, a);
  }
  EXPECT_FALSE(ParsePolicy("mix").ok());
}

}  // namespace
}  // namespace airmix::mixer
