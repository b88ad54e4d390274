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

#ifndef AIRMIX_PRIVACY_H_
#define AIRMIX_PRIVACY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "airmix/rng.h"

namespace airmix::privacy {

// Largest Rényi order searched when converting to (epsilon, delta).
inline constexpr int kMaxOrder = 256;

// Relative residual above which an alternating moment sum is rejected.
inline constexpr double kMaxMomentResidual = 1e-6;

struct PrivacyBudget {
  double epsilon = 0.0;         // target epsilon
  double delta = 0.0;           // target delta in (0, 1)
  int64_t slots = 0;            // number of released mixed samples T
  double sampling_ratio = 0.0;  // r = |N_t| / |N|
  int input_dim = 0;
  int label_dim = 0;
  double noise_power = 0.0;  // sigma_n^2 in watts

  int total_dim() const { return input_dim + label_dim; }

  // Checks everything except the epsilon target, which accounting alone does
  // not need.
  absl::Status ValidateForAccounting() const;
  absl::Status Validate() const;
};

// What a single slot releases: the largest squared mixing ratio and the power
// scaling factor it was sent with.
struct SlotRelease {
  double max_q_sq = 0.0;
  double beta = 0.0;
};

// Per-slot Rényi divergence bound of order gamma for the two Gaussian
// mechanisms (input and label), i.e.
//   (gamma / 2) * max_q_sq * (d_X + d_Y) / (sigma_n^2 / (2 beta)).
double RenyiDivergenceBound(double gamma, double max_q_sq,
                            const PrivacyBudget& budget, double beta);

// The order-2 bound, which fixes the whole per-slot curve since the bound is
// linear in gamma.
double SlotDivergence(const SlotRelease& slot, const PrivacyBudget& budget);

// Natural log of the even central moment
//   C(x) = sum_{i=0}^{x} (-1)^i binom(x, i) exp((i - 1) * eps(i)),
// with eps(i) = i * eps2 / 2. Terms are summed with tracked signs in the log
// domain; if the double-precision result is dominated by cancellation the sum
// is repeated in extended precision. Returns -inf when eps2 == 0 (C = 0).
// Fails on odd or too-small orders, and when cancellation cannot be resolved.
absl::StatusOr<double> LogMomentTerm(int order, double eps2);

// exp(LogMomentTerm(order, eps2)).
absl::StatusOr<double> MomentTerm(int order, double eps2);

// Caches LogMomentTerm for one eps2 value across orders.
class MomentTable {
 public:
  explicit MomentTable(double eps2) : eps2_(eps2) {}

  double eps2() const { return eps2_; }
  absl::StatusOr<double> LogMoment(int order);

 private:
  double eps2_;
  std::vector<double> log_moments_;  // indexed by order / 2; NaN = failed
  std::vector<bool> known_;
};

// Rényi-DP of order gamma for one subsampled slot:
//   1/(gamma-1) * ln(1 + r^2 binom(gamma,2) min{4(e^eps2 - 1), 2 e^eps2}
//                    + 4 sum_{j=3}^{gamma} r^j binom(gamma,j)
//                        sqrt(C(2 floor(j/2)) C(2 ceil(j/2)))).
absl::StatusOr<double> SubsampledRdp(int gamma, double eps2,
                                     double sampling_ratio);

// Same as above, reusing a moment cache.
absl::StatusOr<double> SubsampledRdp(int gamma, MomentTable& moments,
                                     double sampling_ratio);

// Accumulated Rényi-DP curve over orders 2..max_order. Orders whose moment
// terms could not be evaluated hold +inf.
struct RdpCurve {
  std::vector<int> orders;
  std::vector<double> epsilons;
  std::vector<double> slot_max_q_sq;

  double at(int gamma) const { return epsilons.at(gamma - 2); }
};

absl::StatusOr<RdpCurve> AccumulateRdp(const PrivacyBudget& budget,
                                       std::span<const SlotRelease> slots,
                                       int max_order = kMaxOrder);

struct TightEpsilon {
  double epsilon = 0.0;
  int order = 2;
  // Set when no order beyond the loose order-2 bound could be evaluated.
  bool fell_back = false;
  int failed_orders = 0;
};

// epsilon = min_gamma sum_t eps'_t(gamma) + ln(1/delta)/(gamma - 1).
absl::StatusOr<TightEpsilon> ComputeTightEpsilon(
    const PrivacyBudget& budget, std::span<const SlotRelease> slots,
    int max_order = kMaxOrder);

// Convenience overload with one beta shared by every slot.
absl::StatusOr<TightEpsilon> ComputeTightEpsilon(
    const PrivacyBudget& budget, std::span<const double> slot_max_q_sq,
    double beta, int max_order = kMaxOrder);

// Order-2 bound:
//   sum_t ln(1 + r^2 min{4(e^x_t - 1), 2 e^x_t}) + ln(1/delta).
absl::StatusOr<double> LooseEpsilon(const PrivacyBudget& budget,
                                    std::span<const SlotRelease> slots);

absl::StatusOr<double> LooseEpsilon(const PrivacyBudget& budget,
                                    std::span<const double> slot_max_q_sq,
                                    double beta);

// ln(1 + r^2 min{4(e^x - 1), 2 e^x}) for one slot with order-2 bound x.
double LooseSlotTerm(double eps2, double sampling_ratio);

struct BetaSolution {
  double beta = 0.0;
  // Target too small to allow any transmission (epsilon + ln delta <= 0).
  bool silent = false;
  // True when the 2 e^x arm of the min is the active one.
  bool exponential_arm = false;
};

// Closed-form largest beta whose loose bound over `budget.slots` identical
// slots equals the target epsilon.
absl::StatusOr<BetaSolution> SolveBeta(const PrivacyBudget& budget,
                                       double max_q_sq);

// Worst-case squared mean shift when one worker is removed from a slot:
// max_i q_i^2 * (d_X + d_Y), for inputs in [0,1] and one-hot labels.
double WorstCaseMeanShift(std::span<const double> ratios, int total_dim);

struct RenyiEstimate {
  double divergence = 0.0;
  double standard_error = 0.0;
};

// Monte-Carlo estimate of D_gamma(N(s, v) || N(0, v)) from samples of the
// reference distribution. The exact value is gamma * s^2 / (2 v).
absl::StatusOr<RenyiEstimate> EstimateGaussianRenyi(double gamma,
                                                    double sensitivity,
                                                    double variance,
                                                    int64_t n_samples, Rng& rng);

}  // namespace airmix::privacy

#endif  // AIRMIX_PRIVACY_H_
