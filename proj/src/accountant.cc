// Copyright 2026 The dpgran Authors
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

#include "dpgran/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"

namespace dpgran {
namespace {

constexpr int kMinOrder = 2;
constexpr int kMaxOrder = 64;

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double LogSumExp(const std::vector<double>& terms) {
  double max_term = -std::numeric_limits<double>::infinity();
  for (double t : terms) max_term = std::max(max_term, t);
  if (std::isinf(max_term)) return max_term;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

}  // namespace

absl::StatusOr<PrivacyParams> MakePrivacyParams(double epsilon, double delta) {
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be non-negative, got ", epsilon));
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in [0, 1], got ", delta));
  }
  return PrivacyParams{epsilon, delta};
}

absl::Status ValidateMechanismParams(const MechanismParams& params) {
  if (!(params.noise_multiplier > 0.0)) {
    return absl::InvalidArgumentError("noise multiplier must be positive");
  }
  if (!(params.sampling_rate >= 0.0 && params.sampling_rate <= 1.0)) {
    return absl::InvalidArgumentError("sampling rate must lie in [0, 1]");
  }
  if (params.steps < 1) {
    return absl::InvalidArgumentError("steps must be at least 1");
  }
  return absl::OkStatus();
}

std::vector<int> DefaultRdpOrders() {
  std::vector<int> orders;
  for (int alpha = kMinOrder; alpha <= kMaxOrder; ++alpha) {
    orders.push_back(alpha);
  }
  return orders;
}

absl::StatusOr<double> GaussianRdp(double sigma, double alpha) {
  if (!(sigma > 0.0)) {
    return absl::InvalidArgumentError("sigma must be positive");
  }
  if (!(alpha > 1.0)) {
    return absl::InvalidArgumentError("RDP order must exceed 1");
  }
  return alpha / (2.0 * sigma * sigma);
}

absl::StatusOr<double> SubsampledGaussianRdp(double sigma, double sampling_rate,
                                             int alpha) {
  if (!(sigma > 0.0)) {
    return absl::InvalidArgumentError("sigma must be positive");
  }
  if (alpha < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("RDP order must be an integer >= 2, got ", alpha));
  }
  if (!(sampling_rate >= 0.0 && sampling_rate <= 1.0)) {
    return absl::InvalidArgumentError("sampling rate must lie in [0, 1]");
  }
  if (sampling_rate == 0.0) return 0.0;

  const double log_q = std::log(sampling_rate);
  const double log_1mq = std::log1p(-sampling_rate);
  std::vector<double> terms;
  terms.reserve(alpha + 1);
  for (int j = 0; j <= alpha; ++j) {
    // Terms with a zero weight (q == 1 and j < alpha) drop out entirely.
    if (sampling_rate == 1.0 && j < alpha) continue;
    double term = LogBinomial(alpha, j) + j * (j - 1) / (2.0 * sigma * sigma);
    if (j > 0) term += j * log_q;
    if (j < alpha) term += (alpha - j) * log_1mq;
    terms.push_back(term);
  }
  // The sum is >= 1 mathematically; rounding may push it a hair below.
  return std::max(0.0, LogSumExp(terms) / (alpha - 1));
}

absl::StatusOr<RdpCurve> SubsampledGaussianCurve(double sigma,
                                                 double sampling_rate,
                                                 const std::vector<int>& orders) {
  RdpCurve curve;
  curve.reserve(orders.size());
  for (int alpha : orders) {
    absl::StatusOr<double> rdp =
        SubsampledGaussianRdp(sigma, sampling_rate, alpha);
    if (!rdp.ok()) return rdp.status();
    curve.push_back({static_cast<double>(alpha), *rdp});
  }
  return curve;
}

RdpCurve Compose(const RdpCurve& per_step, int64_t steps) {
  RdpCurve composed = per_step;
  for (RdpPoint& point : composed) point.rdp *= static_cast<double>(steps);
  return composed;
}

absl::StatusOr<PrivacyParams> RdpToDp(const RdpCurve& curve, double delta) {
  if (curve.empty()) {
    return absl::InvalidArgumentError("cannot convert an empty RDP curve");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  const double log_inv_delta = -std::log(delta);
  double best = std::numeric_limits<double>::infinity();
  for (const RdpPoint& point : curve) {
    best = std::min(best, point.rdp + log_inv_delta / (point.order - 1.0));
  }
  return PrivacyParams{best, delta};
}

absl::StatusOr<PrivacyParams> AccountDpSgd(const MechanismParams& mechanism,
                                           double delta) {
  if (absl::Status status = ValidateMechanismParams(mechanism); !status.ok()) {
    return status;
  }
  absl::StatusOr<RdpCurve> curve = SubsampledGaussianCurve(
      mechanism.noise_multiplier, mechanism.sampling_rate);
  if (!curve.ok()) return curve.status();
  return RdpToDp(Compose(*curve, mechanism.steps), delta);
}

absl::StatusOr<double> CalibrateNoiseMultiplier(const PrivacyParams& target,
                                                double sampling_rate,
                                                int64_t steps,
                                                SigmaBounds bounds) {
  if (!(target.epsilon > 0.0)) {
    return absl::InvalidArgumentError("target epsilon must be positive");
  }
  if (!(bounds.lower > 0.0 && bounds.lower < bounds.upper)) {
    return absl::InvalidArgumentError("sigma bounds must satisfy 0 < lo < hi");
  }
  auto epsilon_at = [&](double sigma) -> absl::StatusOr<double> {
    absl::StatusOr<PrivacyParams> privacy =
        AccountDpSgd({sigma, sampling_rate, steps}, target.delta);
    if (!privacy.ok()) return privacy.status();
    return privacy->epsilon;
  };

  absl::StatusOr<double> eps_hi = epsilon_at(bounds.upper);
  if (!eps_hi.ok()) return eps_hi.status();
  if (*eps_hi > target.epsilon) {
    return absl::OutOfRangeError(absl::StrCat(
        "epsilon ", target.epsilon, " is not reachable with sigma <= ",
        bounds.upper, " (accounted epsilon there is ", *eps_hi, ")"));
  }
  absl::StatusOr<double> eps_lo = epsilon_at(bounds.lower);
  if (!eps_lo.ok()) return eps_lo.status();
  if (*eps_lo <= target.epsilon) return bounds.lower;

  double lo = bounds.lower;
  double hi = bounds.upper;
  while (hi - lo > kCalibrationRelativeTolerance * lo) {
    const double mid = 0.5 * (lo + hi);
    absl::StatusOr<double> eps_mid = epsilon_at(mid);
    if (!eps_mid.ok()) return eps_mid.status();
    if (*eps_mid <= target.epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

GroupPrivacyResult GroupPrivacy(const PrivacyParams& base, int64_t k) {
  const double kd = static_cast<double>(k);
  const double epsilon = kd * base.epsilon;
  if (k == 1) return {base, false};
  // k e^((k-1) eps) delta; the log form only kicks in when the exponential
  // itself would overflow.
  double delta = 0.0;
  if (base.delta > 0.0) {
    const double exponent = (kd - 1.0) * base.epsilon;
    if (exponent < 700.0) {
      delta = kd * std::exp(exponent) * base.delta;
    } else {
      delta = std::exp(std::log(kd) + exponent + std::log(base.delta));
    }
  }
  GroupPrivacyResult result;
  result.params.epsilon = epsilon;
  if (delta > 1.0) {
    result.params.delta = 1.0;
    result.vacuous = true;
  } else {
    result.params.delta = delta;
  }
  return result;
}

double ScaleEpsilonForGranularity(double epsilon_base, int64_t max_utterances) {
  return epsilon_base * static_cast<double>(max_utterances);
}

int64_t StepsForEpochs(double epochs, int64_t dataset_size, int64_t lot_size) {
  const double lots = epochs * static_cast<double>(dataset_size) /
                      static_cast<double>(lot_size);
  return std::max<int64_t>(1, std::llround(lots));
}

std::string AccountingCsvHeader() {
  return CsvLine({"run_id", "sigma", "q", "steps", "delta", "epsilon"});
}

std::string AccountingCsvRow(const std::string& run_id,
                             const MechanismParams& mechanism,
                             const PrivacyParams& privacy) {
  return CsvLine({run_id, FormatDouble(mechanism.noise_multiplier),
                  FormatDouble(mechanism.sampling_rate),
                  absl::StrCat(mechanism.steps), FormatDouble(privacy.delta),
                  FormatDouble(privacy.epsilon)});
}

}  // namespace dpgran
