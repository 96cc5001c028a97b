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

#ifndef DPGRAN_ACCOUNTANT_H_
#define DPGRAN_ACCOUNTANT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dpgran {

// An (epsilon, delta) approximate-DP guarantee.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

absl::StatusOr<PrivacyParams> MakePrivacyParams(double epsilon, double delta);

// Poisson-subsampled Gaussian mechanism run for `steps` lots.
struct MechanismParams {
  double noise_multiplier = 1.0;
  double sampling_rate = 0.0;
  int64_t steps = 1;
};

absl::Status ValidateMechanismParams(const MechanismParams& params);

struct RdpPoint {
  double order = 2.0;
  double rdp = 0.0;
};

// Renyi-DP values at a set of orders, sorted by increasing order.
using RdpCurve = std::vector<RdpPoint>;

// Integer orders 2..64 used throughout the accountant.
std::vector<int> DefaultRdpOrders();

// Renyi DP of the Gaussian mechanism with unit sensitivity: alpha / (2 sigma^2).
absl::StatusOr<double> GaussianRdp(double sigma, double alpha);

// Per-step RDP bound of the Poisson-subsampled Gaussian mechanism at an
// integer order, via the binomial expansion
//   1/(alpha-1) * log sum_j C(alpha,j) (1-q)^(alpha-j) q^j exp(j(j-1)/(2 sigma^2)).
// The sum is evaluated in log space so small sigma does not overflow.
absl::StatusOr<double> SubsampledGaussianRdp(double sigma, double sampling_rate,
                                             int alpha);

// Per-step curve of the subsampled Gaussian mechanism over `orders`.
absl::StatusOr<RdpCurve> SubsampledGaussianCurve(
    double sigma, double sampling_rate,
    const std::vector<int>& orders = DefaultRdpOrders());

// RDP composes additively: every value is multiplied by `steps`.
RdpCurve Compose(const RdpCurve& per_step, int64_t steps);

// epsilon = min over orders of rdp + log(1/delta) / (alpha - 1).
absl::StatusOr<PrivacyParams> RdpToDp(const RdpCurve& curve, double delta);

// Full DP-SGD accounting: per-step curve, T-fold composition, conversion.
absl::StatusOr<PrivacyParams> AccountDpSgd(const MechanismParams& mechanism,
                                           double delta);

struct SigmaBounds {
  double lower = 0.05;
  double upper = 1000.0;
};

// Relative width at which the noise-multiplier bisection stops.
inline constexpr double kCalibrationRelativeTolerance = 1e-3;

// Smallest noise multiplier (to kCalibrationRelativeTolerance) whose
// accounted epsilon at `target.delta` does not exceed `target.epsilon`.
// Returns OutOfRange when even `bounds.upper` overshoots the budget.
absl::StatusOr<double> CalibrateNoiseMultiplier(const PrivacyParams& target,
                                                double sampling_rate,
                                                int64_t steps,
                                                SigmaBounds bounds = {});

struct GroupPrivacyResult {
  PrivacyParams params;
  // True when k * e^((k-1) eps) * delta exceeded 1 and delta was clamped.
  bool vacuous = false;
};

// Group privacy for groups of k records: (k eps, k e^((k-1) eps) delta).
GroupPrivacyResult GroupPrivacy(const PrivacyParams& base, int64_t k);

// Scales a per-utterance epsilon by the maximum number of utterances in a
// dialogue, giving the matching document-level value.
double ScaleEpsilonForGranularity(double epsilon_base, int64_t max_utterances);

// Number of lots for a (possibly fractional) epoch count, where one epoch is
// N / L expected lots. Rounds to nearest and never returns less than 1.
int64_t StepsForEpochs(double epochs, int64_t dataset_size, int64_t lot_size);

// CSV row: run_id,sigma,q,steps,delta,epsilon.
std::string AccountingCsvHeader();
std::string AccountingCsvRow(const std::string& run_id,
                             const MechanismParams& mechanism,
                             const PrivacyParams& privacy);

}  // namespace dpgran

#endif  // DPGRAN_ACCOUNTANT_H_
