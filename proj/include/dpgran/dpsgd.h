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

#ifndef DPGRAN_DPSGD_H_
#define DPGRAN_DPSGD_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/accountant.h"

namespace dpgran {

// A finite-sum training objective with per-example gradients. The dataset is
// bound into the objective; examples are addressed by index.
class DifferentiableObjective {
 public:
  virtual ~DifferentiableObjective() = default;

  virtual size_t NumParameters() const = 0;
  virtual size_t NumExamples() const = 0;

  virtual double Loss(std::span<const double> params, size_t example) const = 0;

  // Overwrites `grad` (NumParameters() long) with the gradient of the
  // example's loss and returns the loss. Must be safe to call concurrently.
  virtual double LossAndGradient(std::span<const double> params, size_t example,
                                 std::span<double> grad) const = 0;
};

struct DpSgdConfig {
  // +infinity disables clipping.
  double clip_bound = 1.0;
  double noise_multiplier = 0.0;
  int64_t lot_size = 1;
  int64_t dataset_size = 1;
  double epochs = 1.0;
  double learning_rate = 0.1;
  uint64_t seed = 0;
  int64_t accumulation_chunk = 1;
  // Workers for per-example gradients. Results do not depend on this.
  int num_threads = 1;

  double sampling_rate() const {
    return static_cast<double>(lot_size) / static_cast<double>(dataset_size);
  }
  int64_t steps() const {
    return StepsForEpochs(epochs, dataset_size, lot_size);
  }
};

absl::Status ValidateConfig(const DpSgdConfig& config);

// Independent streams for lot sampling and for noise, both derived from one
// seed by domain separation.
struct DpSgdRng {
  std::mt19937_64 sampling;
  std::mt19937_64 noise;

  static DpSgdRng FromSeed(uint64_t seed);
};

struct TrainState {
  std::vector<double> params;
  int64_t step = 0;
  DpSgdRng rng;
};

TrainState MakeTrainState(std::vector<double> params, uint64_t seed);

struct StepTrace {
  std::vector<int64_t> lot_indices;
  std::vector<double> preclip_norms;
  std::vector<double> postclip_norms;
  std::vector<double> losses;
  double noise_norm = 0.0;
  double update_norm = 0.0;
};

// One row of the loss history: step,lot_size_realized,mean_loss,
// mean_preclip_norm,frac_clipped.
struct StepSummary {
  int64_t step = 0;
  int64_t lot_size_realized = 0;
  double mean_loss = 0.0;
  double mean_preclip_norm = 0.0;
  double frac_clipped = 0.0;
};

StepSummary Summarize(const StepTrace& trace, int64_t step, double clip_bound);

// Includes each of 0..n-1 independently with probability q. Sorted output.
std::vector<int64_t> PoissonSample(int64_t n, double q, std::mt19937_64& rng);

// g / max(1, ||g||_2 / C).
std::vector<double> ClipGradient(std::span<const double> gradient,
                                 double clip_bound);

double L2Norm(std::span<const double> v);

// Draws the per-lot noise vector N(0, sigma^2 C^2 I) of the given dimension.
std::vector<double> DrawNoise(size_t dimension, double noise_multiplier,
                              double clip_bound, std::mt19937_64& rng);

// One step of DP-SGD on the given lot:
//   theta <- theta - lr / L * (sum_i clip(g_i) + N(0, sigma^2 C^2 I))
// with L the configured lot size, not the realized one.
absl::StatusOr<StepTrace> NoisyLotUpdate(TrainState& state,
                                         const DifferentiableObjective& objective,
                                         std::span<const int64_t> lot,
                                         const DpSgdConfig& config);

// Returns the privacy spent by the finished run, or nullopt when the run is
// not private.
using AccountantHook = std::function<absl::StatusOr<std::optional<PrivacyParams>>(
    const MechanismParams&)>;

// Hook that accounts with the RDP accountant at a fixed delta; non-private
// runs (sigma == 0) yield nullopt.
AccountantHook RdpAccountantHook(double delta);

struct TrainResult {
  TrainState state;
  std::optional<PrivacyParams> privacy;
  std::vector<StepSummary> history;
};

// Runs config.steps() lots of Poisson-sampled DP-SGD starting from
// `initial_params`. `on_step`, when set, sees every StepTrace.
absl::StatusOr<TrainResult> Train(
    const DifferentiableObjective& objective, std::vector<double> initial_params,
    const DpSgdConfig& config, const AccountantHook& accountant,
    const std::function<void(const StepTrace&)>& on_step = nullptr);

std::string LossHistoryCsvHeader();
std::string LossHistoryCsvRow(const StepSummary& summary);

}  // namespace dpgran

#endif  // DPGRAN_DPSGD_H_
