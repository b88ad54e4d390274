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

#include "airmix/privacy.h"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "absl/strings/str_cat.h"

namespace airmix::privacy {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDoubleEps = std::numeric_limits<double>::epsilon();
// Double-precision results are accepted below this residual; above it the sum
// is repeated with MPFR.
constexpr double kDoubleResidualTarget = 1e-12;
constexpr long kMinPrecisionBits = 128;
constexpr long kMaxPrecisionBits = 1L << 16;

// ln(n!) for n in [0, 2 * kMaxOrder].
const std::array<double, 2 * kMaxOrder + 2>& LogFactorials() {
  static const auto table = [] {
    std::array<double, 2 * kMaxOrder + 2> t{};
    for (size_t n = 0; n < t.size(); ++n) {
      t[n] = std::lgamma(static_cast<double>(n) + 1.0);
    }
    return t;
  }();
  return table;
}

double LogBinomial(int n, int k) {
  const auto& lf = LogFactorials();
  return lf[n] - lf[k] - lf[n - k];
}

// log(e^a + e^b) with -inf handling.
double LogAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// ln(1 + e^a).
double Softplus(double a) {
  if (a == -kInf) return 0.0;
  if (a > 35.0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

// ln(e^c - 1) for c > 0.
double LogExpm1(double c) {
  if (c > 35.0) return c + std::log1p(-std::exp(-c));
  return std::log(std::expm1(c));
}

// log of min{4(e^x - 1), 2 e^x}; the arms cross at e^x = 2.
double LogOrderTwoArm(double eps2) {
  if (eps2 <= 0.0) return -kInf;
  if (eps2 <= std::log(2.0)) return std::log(4.0) + std::log(std::expm1(eps2));
  return std::log(2.0) + eps2;
}

struct SignedSum {
  double log_value = 0.0;  // valid when residual is finite
  double residual = kInf;
};

SignedSum DoubleMomentSum(int order, double eps2) {
  double log_pos = -kInf;
  double log_neg = -kInf;
  for (int i = 0; i <= order; ++i) {
    const double a = LogBinomial(order, i) +
                     0.5 * static_cast<double>(i - 1) * i * eps2;
    if (i % 2 == 0) {
      log_pos = LogAddExp(log_pos, a);
    } else {
      log_neg = LogAddExp(log_neg, a);
    }
  }
  SignedSum out;
  if (!(log_neg < log_pos)) return out;
  const double cancel = -std::expm1(log_neg - log_pos);  // 1 - e^(N-P)
  out.log_value = log_pos + std::log(cancel);
  const double condition = (1.0 + std::exp(log_neg - log_pos)) / cancel;
  out.residual = kDoubleEps * (order + 1) * condition;
  return out;
}

// RAII holders for the MPFR / GMP C types.
class MpFloat {
 public:
  explicit MpFloat(long bits) { mpfr_init2(v_, bits); }
  ~MpFloat() { mpfr_clear(v_); }
  MpFloat(const MpFloat&) = delete;
  MpFloat& operator=(const MpFloat&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

class MpInt {
 public:
  MpInt() { mpz_init(v_); }
  ~MpInt() { mpz_clear(v_); }
  MpInt(const MpInt&) = delete;
  MpInt& operator=(const MpInt&) = delete;
  mpz_ptr get() { return v_; }

 private:
  mpz_t v_;
};

// The same alternating sum evaluated with `bits` of mantissa. The binomial
// coefficients are exact; exp(i (i-1) eps2 / 2) is built by the recurrence
// E_{i+1} = E_i * (e^eps2)^i.
SignedSum MpfrMomentSum(int order, double eps2, long bits) {
  MpFloat growth(bits), step(bits), term(bits), power(bits), sum(bits),
      abs_sum(bits), scratch(bits);
  MpInt binom;
  mpfr_set_d(growth.get(), eps2, MPFR_RNDN);
  mpfr_exp(growth.get(), growth.get(), MPFR_RNDN);  // e^eps2
  mpfr_set_ui(step.get(), 1, MPFR_RNDN);            // e^(i eps2)
  // E_0 = E_1 = 1.
  mpfr_set_ui(power.get(), 1, MPFR_RNDN);
  mpfr_set_ui(sum.get(), 0, MPFR_RNDN);
  mpfr_set_ui(abs_sum.get(), 0, MPFR_RNDN);
  mpz_set_ui(binom.get(), 1);
  for (int i = 0; i <= order; ++i) {
    if (i >= 2) {
      // E_i = E_{i-1} * e^((i-1) eps2)
      mpfr_mul(step.get(), step.get(), growth.get(), MPFR_RNDN);
      mpfr_mul(power.get(), power.get(), step.get(), MPFR_RNDN);
    }
    mpfr_mul_z(term.get(), power.get(), binom.get(), MPFR_RNDN);
    mpfr_add(abs_sum.get(), abs_sum.get(), term.get(), MPFR_RNDN);
    if (i % 2 == 0) {
      mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    } else {
      mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    }
    // binom(order, i + 1) = binom(order, i) * (order - i) / (i + 1)
    mpz_mul_ui(binom.get(), binom.get(), order - i);
    mpz_divexact_ui(binom.get(), binom.get(), i + 1);
  }
  SignedSum out;
  if (mpfr_sgn(sum.get()) <= 0) return out;
  // Error bound ~ (order + 1)^2 * 2^-bits * sum|t|, relative to the result.
  mpfr_div(scratch.get(), abs_sum.get(), sum.get(), MPFR_RNDN);
  mpfr_log(scratch.get(), scratch.get(), MPFR_RNDN);
  const double log_condition = mpfr_get_d(scratch.get(), MPFR_RNDN);
  out.residual = std::exp(log_condition + 2.0 * std::log(order + 1.0) -
                          static_cast<double>(bits) * std::log(2.0));
  mpfr_log(scratch.get(), sum.get(), MPFR_RNDN);
  out.log_value = mpfr_get_d(scratch.get(), MPFR_RNDN);
  return out;
}

// ln of the small-eps2 leading behaviour (order-1)!! * eps2^(order/2), used to
// size the MPFR precision.
double LogLeadingMoment(int order, double eps2) {
  const auto& lf = LogFactorials();
  const int half = order / 2;
  return half * std::log(eps2) + lf[order] - half * std::log(2.0) - lf[half];
}

double LogAbsTermSum(int order, double eps2) {
  double acc = -kInf;
  for (int i = 0; i <= order; ++i) {
    acc = LogAddExp(acc, LogBinomial(order, i) +
                             0.5 * static_cast<double>(i - 1) * i * eps2);
  }
  return acc;
}

absl::Status CheckOrder(int order) {
  if (order < 2 || order % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("moment order must be even and >= 2, got ", order));
  }
  if (order > 2 * kMaxOrder) {
    return absl::InvalidArgumentError(
        absl::StrCat("moment order ", order, " exceeds supported range"));
  }
  return absl::OkStatus();
}

double SlotEps2(const SlotRelease& s, const PrivacyBudget& b) {
  return SlotDivergence(s, b);
}

// Sum of loose per-slot terms in slot order.
double SumLooseTerms(const PrivacyBudget& budget,
                     std::span<const SlotRelease> slots) {
  double total = 0.0;
  for (const auto& s : slots) {
    total += LooseSlotTerm(SlotEps2(s, budget), budget.sampling_ratio);
  }
  return total;
}

struct SlotGroup {
  double eps2;
  int64_t count;
};

std::vector<SlotGroup> GroupSlots(const PrivacyBudget& budget,
                                  std::span<const SlotRelease> slots) {
  std::map<double, int64_t> counts;
  for (const auto& s : slots) ++counts[SlotEps2(s, budget)];
  std::vector<SlotGroup> groups;
  groups.reserve(counts.size());
  for (const auto& [eps2, count] : counts) groups.push_back({eps2, count});
  return groups;
}

absl::Status CheckSlots(std::span<const SlotRelease> slots) {
  for (const auto& s : slots) {
    if (!(s.beta >= 0.0) || !std::isfinite(s.beta)) {
      return absl::InvalidArgumentError("slot beta must be finite and >= 0");
    }
    if (!(s.max_q_sq >= 0.0 && s.max_q_sq <= 1.0)) {
      return absl::InvalidArgumentError("slot max q^2 must lie in [0, 1]");
    }
  }
  return absl::OkStatus();
}

std::vector<SlotRelease> SharedBeta(std::span<const double> slot_max_q_sq,
                                    double beta) {
  std::vector<SlotRelease> slots;
  slots.reserve(slot_max_q_sq.size());
  for (double q : slot_max_q_sq) slots.push_back({q, beta});
  return slots;
}

}  // namespace

absl::Status PrivacyBudget::ValidateForAccounting() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (slots < 0) {
    return absl::InvalidArgumentError("slot count must be non-negative");
  }
  if (!(sampling_ratio > 0.0 && sampling_ratio <= 1.0)) {
    return absl::InvalidArgumentError("sampling ratio must lie in (0, 1]");
  }
  if (input_dim < 1 || label_dim < 1) {
    return absl::InvalidArgumentError("dimensions must be >= 1");
  }
  if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
    return absl::InvalidArgumentError("noise power must be positive");
  }
  return absl::OkStatus();
}

absl::Status PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("epsilon must be positive and finite");
  }
  return ValidateForAccounting();
}

double RenyiDivergenceBound(double gamma, double max_q_sq,
                            const PrivacyBudget& budget, double beta) {
  if (beta <= 0.0) return 0.0;
  const double relative_noise = budget.noise_power / (2.0 * beta);
  return gamma / 2.0 * max_q_sq * budget.total_dim() / relative_noise;
}

double SlotDivergence(const SlotRelease& slot, const PrivacyBudget& budget) {
  return RenyiDivergenceBound(2.0, slot.max_q_sq, budget, slot.beta);
}

absl::StatusOr<double> LogMomentTerm(int order, double eps2) {
  if (auto s = CheckOrder(order); !s.ok()) return s;
  if (!(eps2 >= 0.0) || std::isnan(eps2)) {
    return absl::InvalidArgumentError("divergence bound must be >= 0");
  }
  if (eps2 == 0.0) return -kInf;  // sum_i (-1)^i binom(x, i) = 0
  if (std::isinf(eps2)) return kInf;

  const SignedSum fast = DoubleMomentSum(order, eps2);
  if (fast.residual <= kDoubleResidualTarget) return fast.log_value;

  // Cancellation only arises for small eps2, where the terms stay inside the
  // MPFR exponent range.
  const double log_abs = LogAbsTermSum(order, eps2);
  const double lost_bits =
      std::max(0.0, (log_abs - LogLeadingMoment(order, eps2)) / std::log(2.0));
  long bits = std::clamp(static_cast<long>(lost_bits) + 96, kMinPrecisionBits,
                         kMaxPrecisionBits);
  SignedSum best = fast;
  while (true) {
    const SignedSum precise = MpfrMomentSum(order, eps2, bits);
    if (precise.residual < best.residual) best = precise;
    if (best.residual <= kDoubleResidualTarget || bits >= kMaxPrecisionBits) {
      break;
    }
    bits = std::min(bits * 2, kMaxPrecisionBits);
  }
  if (best.residual > kMaxMomentResidual) {
    return absl::FailedPreconditionError(absl::StrCat(
        "moment term C(", order, ") at divergence ", eps2,
        " lost to cancellation (relative residual ", best.residual,
        "); use the loose order-2 bound"));
  }
  return best.log_value;
}

absl::StatusOr<double> MomentTerm(int order, double eps2) {
  auto log_value = LogMomentTerm(order, eps2);
  if (!log_value.ok()) return log_value.status();
  return std::exp(*log_value);
}

absl::StatusOr<double> MomentTable::LogMoment(int order) {
  if (auto s = CheckOrder(order); !s.ok()) return s;
  const size_t idx = order / 2;
  if (idx >= known_.size()) {
    known_.resize(idx + 1, false);
    log_moments_.resize(idx + 1, 0.0);
  }
  if (!known_[idx]) {
    auto v = LogMomentTerm(order, eps2_);
    known_[idx] = true;
    if (!v.ok()) {
      log_moments_[idx] = std::numeric_limits<double>::quiet_NaN();
      return v.status();
    }
    log_moments_[idx] = *v;
  }
  if (std::isnan(log_moments_[idx])) {
    return absl::FailedPreconditionError(absl::StrCat(
        "moment term C(", order, ") lost to cancellation; use the loose bound"));
  }
  return log_moments_[idx];
}

double LooseSlotTerm(double eps2, double sampling_ratio) {
  return Softplus(2.0 * std::log(sampling_ratio) + LogOrderTwoArm(eps2));
}

absl::StatusOr<double> SubsampledRdp(int gamma, MomentTable& moments,
                                     double sampling_ratio) {
  if (gamma < 2 || gamma > kMaxOrder) {
    return absl::InvalidArgumentError(
        absl::StrCat("order must lie in [2, ", kMaxOrder, "], got ", gamma));
  }
  if (!(sampling_ratio > 0.0 && sampling_ratio <= 1.0)) {
    return absl::InvalidArgumentError("sampling ratio must lie in (0, 1]");
  }
  const double log_r = std::log(sampling_ratio);
  double log_inner = 2.0 * log_r + LogBinomial(gamma, 2) +
                     LogOrderTwoArm(moments.eps2());
  for (int j = 3; j <= gamma; ++j) {
    auto lo = moments.LogMoment(2 * (j / 2));
    if (!lo.ok()) return lo.status();
    auto hi = moments.LogMoment(2 * ((j + 1) / 2));
    if (!hi.ok()) return hi.status();
    log_inner = LogAddExp(log_inner, std::log(4.0) + j * log_r +
                                         LogBinomial(gamma, j) +
                                         0.5 * (*lo + *hi));
  }
  return Softplus(log_inner) / (gamma - 1);
}

absl::StatusOr<double> SubsampledRdp(int gamma, double eps2,
                                     double sampling_ratio) {
  MomentTable moments(eps2);
  return SubsampledRdp(gamma, moments, sampling_ratio);
}

absl::StatusOr<RdpCurve> AccumulateRdp(const PrivacyBudget& budget,
                                       std::span<const SlotRelease> slots,
                                       int max_order) {
  if (auto s = budget.ValidateForAccounting(); !s.ok()) return s;
  if (auto s = CheckSlots(slots); !s.ok()) return s;
  if (max_order < 2 || max_order > kMaxOrder) {
    return absl::InvalidArgumentError("max order out of range");
  }
  RdpCurve curve;
  for (const auto& s : slots) curve.slot_max_q_sq.push_back(s.max_q_sq);
  auto groups = GroupSlots(budget, slots);
  std::vector<MomentTable> tables;
  tables.reserve(groups.size());
  for (const auto& g : groups) tables.emplace_back(g.eps2);

  bool failed = false;
  for (int gamma = 2; gamma <= max_order; ++gamma) {
    curve.orders.push_back(gamma);
    if (gamma == 2) {
      curve.epsilons.push_back(SumLooseTerms(budget, slots));
      continue;
    }
    double total = 0.0;
    for (size_t g = 0; g < groups.size() && !failed; ++g) {
      auto e = SubsampledRdp(gamma, tables[g], budget.sampling_ratio);
      if (!e.ok()) {
        failed = true;
        break;
      }
      total += static_cast<double>(groups[g].count) * *e;
    }
    // Higher orders need every lower moment, so a failure is permanent.
    curve.epsilons.push_back(failed ? kInf : total);
  }
  return curve;
}

absl::StatusOr<TightEpsilon> ComputeTightEpsilon(
    const PrivacyBudget& budget, std::span<const SlotRelease> slots,
    int max_order) {
  if (auto s = budget.ValidateForAccounting(); !s.ok()) return s;
  if (auto s = CheckSlots(slots); !s.ok()) return s;
  if (max_order < 2 || max_order > kMaxOrder) {
    return absl::InvalidArgumentError("max order out of range");
  }
  const double log_inv_delta = -std::log(budget.delta);
  auto groups = GroupSlots(budget, slots);
  std::vector<MomentTable> tables;
  tables.reserve(groups.size());
  for (const auto& g : groups) tables.emplace_back(g.eps2);

  TightEpsilon best;
  best.epsilon = SumLooseTerms(budget, slots) + log_inv_delta;
  best.order = 2;
  double previous = best.epsilon;
  bool any_higher = false;
  for (int gamma = 3; gamma <= max_order; ++gamma) {
    double rdp = 0.0;
    bool ok = true;
    for (size_t g = 0; g < groups.size(); ++g) {
      auto e = SubsampledRdp(gamma, tables[g], budget.sampling_ratio);
      if (!e.ok()) {
        ok = false;
        break;
      }
      rdp += static_cast<double>(groups[g].count) * *e;
    }
    if (!ok) {
      best.failed_orders = max_order - gamma + 1;
      break;
    }
    any_higher = true;
    const double conversion = log_inv_delta / (gamma - 1);
    const double total = rdp + conversion;
    if (total < best.epsilon) {
      best.epsilon = total;
      best.order = gamma;
    }
    const double conversion_change = log_inv_delta / (gamma - 2) - conversion;
    if (total > previous && conversion_change < 1e-9) break;
    previous = total;
  }
  best.fell_back = !any_higher && max_order > 2;
  return best;
}

absl::StatusOr<TightEpsilon> ComputeTightEpsilon(
    const PrivacyBudget& budget, std::span<const double> slot_max_q_sq,
    double beta, int max_order) {
  const auto slots = SharedBeta(slot_max_q_sq, beta);
  return ComputeTightEpsilon(budget, slots, max_order);
}

absl::StatusOr<double> LooseEpsilon(const PrivacyBudget& budget,
                                    std::span<const SlotRelease> slots) {
  if (auto s = budget.ValidateForAccounting(); !s.ok()) return s;
  if (auto s = CheckSlots(slots); !s.ok()) return s;
  return SumLooseTerms(budget, slots) - std::log(budget.delta);
}

absl::StatusOr<double> LooseEpsilon(const PrivacyBudget& budget,
                                    std::span<const double> slot_max_q_sq,
                                    double beta) {
  const auto slots = SharedBeta(slot_max_q_sq, beta);
  return LooseEpsilon(budget, slots);
}

absl::StatusOr<BetaSolution> SolveBeta(const PrivacyBudget& budget,
                                       double max_q_sq) {
  if (auto s = budget.Validate(); !s.ok()) return s;
  if (budget.slots < 1) {
    return absl::InvalidArgumentError("beta needs at least one slot");
  }
  if (!(max_q_sq > 0.0 && max_q_sq <= 1.0)) {
    return absl::InvalidArgumentError("max q^2 must lie in (0, 1]");
  }
  BetaSolution out;
  // Per-slot share of the budget left after the delta conversion term.
  const double per_slot =
      (budget.epsilon + std::log(budget.delta)) / static_cast<double>(budget.slots);
  if (!(per_slot > 0.0)) {
    out.silent = true;
    return out;
  }
  const double r_sq = budget.sampling_ratio * budget.sampling_ratio;
  double log_arg;  // the ln(...) factor, i.e. the target order-2 divergence
  if (per_slot >= std::log1p(4.0 * r_sq)) {
    out.exponential_arm = true;
    log_arg = LogExpm1(per_slot) - std::log(2.0 * r_sq);
  } else {
    log_arg = std::log1p(std::expm1(per_slot) / (4.0 * r_sq));
  }
  out.beta = (budget.noise_power / 2.0) * log_arg /
             (max_q_sq * budget.total_dim());
  return out;
}

double WorstCaseMeanShift(std::span<const double> ratios, int total_dim) {
  double max_q = 0.0;
  for (double q : ratios) max_q = std::max(max_q, std::abs(q));
  return max_q * max_q * total_dim;
}

absl::StatusOr<RenyiEstimate> EstimateGaussianRenyi(double gamma,
                                                    double sensitivity,
                                                    double variance,
                                                    int64_t n_samples,
                                                    Rng& rng) {
  if (!(gamma > 1.0)) {
    return absl::InvalidArgumentError("Rényi order must exceed 1");
  }
  if (!(variance > 0.0)) {
    return absl::InvalidArgumentError("variance must be positive");
  }
  if (n_samples < 2) {
    return absl::InvalidArgumentError("need at least two samples");
  }
  if (sensitivity == 0.0) return RenyiEstimate{};

  std::normal_distribution<double> reference(0.0, std::sqrt(variance));
  std::vector<double> log_w(n_samples);
  double top = -kInf;
  for (auto& lw : log_w) {
    const double z = reference(rng);
    const double log_ratio =
        (2.0 * sensitivity * z - sensitivity * sensitivity) / (2.0 * variance);
    lw = gamma * log_ratio;
    top = std::max(top, lw);
  }
  double s1 = 0.0;
  double s2 = 0.0;
  for (double lw : log_w) {
    const double w = std::exp(lw - top);
    s1 += w;
    s2 += w * w;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = s1 / n;
  const double second = s2 / n;
  const double rel_var = std::max(second / (mean * mean) - 1.0, 0.0);
  RenyiEstimate est;
  est.divergence = (top + std::log(mean)) / (gamma - 1.0);
  est.standard_error = std::sqrt(rel_var / n) / (gamma - 1.0);
  return est;
}

}  // namespace airmix::privacy
