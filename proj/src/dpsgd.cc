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

#include "dpgran/dpsgd.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"

namespace dpgran {
namespace {

constexpr uint32_t kSamplingDomain = 0x53414d50;  // "SAMP"
constexpr uint32_t kNoiseDomain = 0x4e4f4953;     // "NOIS"

std::mt19937_64 SeededStream(uint64_t seed, uint32_t domain) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32), domain};
  return std::mt19937_64(seq);
}

// Sums rows [0, count) of `rows` into row 0 by a fixed pairwise tree, so the
// rounding pattern depends only on the row count.
void TreeReduce(std::vector<double>& rows, size_t count, size_t width) {
  for (size_t stride = 1; stride < count; stride *= 2) {
    for (size_t i = 0; i + stride < count; i += 2 * stride) {
      double* dst = rows.data() + i * width;
      const double* src = rows.data() + (i + stride) * width;
      for (size_t k = 0; k < width; ++k) dst[k] += src[k];
    }
  }
}

}  // namespace

absl::Status ValidateConfig(const DpSgdConfig& config) {
  if (!(config.clip_bound > 0.0)) {
    return absl::InvalidArgumentError("clip bound must be positive");
  }
  if (!(config.noise_multiplier >= 0.0)) {
    return absl::InvalidArgumentError("noise multiplier must be non-negative");
  }
  if (config.noise_multiplier > 0.0 && std::isinf(config.clip_bound)) {
    return absl::InvalidArgumentError(
        "noise requires a finite clip bound (noise std is sigma * C)");
  }
  if (config.dataset_size < 1) {
    return absl::InvalidArgumentError("dataset size must be positive");
  }
  if (config.lot_size < 1 || config.lot_size > config.dataset_size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lot size must lie in [1, N=", config.dataset_size, "], got ",
        config.lot_size));
  }
  if (!(config.epochs > 0.0)) {
    return absl::InvalidArgumentError("epochs must be positive");
  }
  if (!(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (config.accumulation_chunk < 1) {
    return absl::InvalidArgumentError("accumulation chunk must be positive");
  }
  if (config.num_threads < 1) {
    return absl::InvalidArgumentError("thread count must be positive");
  }
  return absl::OkStatus();
}

DpSgdRng DpSgdRng::FromSeed(uint64_t seed) {
  return DpSgdRng{SeededStream(seed, kSamplingDomain),
                  SeededStream(seed, kNoiseDomain)};
}

TrainState MakeTrainState(std::vector<double> params, uint64_t seed) {
  return TrainState{std::move(params), 0, DpSgdRng::FromSeed(seed)};
}

StepSummary Summarize(const StepTrace& trace, int64_t step, double clip_bound) {
  StepSummary summary;
  summary.step = step;
  summary.lot_size_realized = static_cast<int64_t>(trace.lot_indices.size());
  if (trace.lot_indices.empty()) return summary;
  double loss = 0.0;
  double norm = 0.0;
  int64_t clipped = 0;
  for (size_t i = 0; i < trace.lot_indices.size(); ++i) {
    loss += trace.losses[i];
    norm += trace.preclip_norms[i];
    if (trace.preclip_norms[i] > clip_bound) ++clipped;
  }
  const double n = static_cast<double>(trace.lot_indices.size());
  summary.mean_loss = loss / n;
  summary.mean_preclip_norm = norm / n;
  summary.frac_clipped = static_cast<double>(clipped) / n;
  return summary;
}

std::vector<int64_t> PoissonSample(int64_t n, double q, std::mt19937_64& rng) {
  std::vector<int64_t> lot;
  if (n <= 0 || q <= 0.0) return lot;
  if (q >= 1.0) {
    lot.resize(n);
    for (int64_t i = 0; i < n; ++i) lot[i] = i;
    return lot;
  }
  // Gaps between included indices are geometric; this is the same law as n
  // independent Bernoulli(q) draws at O(qn) cost.
  std::geometric_distribution<int64_t> gap(q);
  for (int64_t i = gap(rng); i < n; i += 1 + gap(rng)) lot.push_back(i);
  return lot;
}

double L2Norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::vector<double> ClipGradient(std::span<const double> gradient,
                                 double clip_bound) {
  const double divisor = std::max(1.0, L2Norm(gradient) / clip_bound);
  std::vector<double> clipped(gradient.begin(), gradient.end());
  for (double& x : clipped) x /= divisor;
  return clipped;
}

std::vector<double> DrawNoise(size_t dimension, double noise_multiplier,
                              double clip_bound, std::mt19937_64& rng) {
  std::vector<double> noise(dimension, 0.0);
  if (noise_multiplier == 0.0) return noise;
  std::normal_distribution<double> gaussian(0.0, noise_multiplier * clip_bound);
  for (double& x : noise) x = gaussian(rng);
  return noise;
}

absl::StatusOr<StepTrace> NoisyLotUpdate(TrainState& state,
                                         const DifferentiableObjective& objective,
                                         std::span<const int64_t> lot,
                                         const DpSgdConfig& config) {
  const size_t dim = objective.NumParameters();
  if (state.params.size() != dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("parameter vector has length ", state.params.size(),
                     " but the model expects ", dim));
  }
  const int64_t n = static_cast<int64_t>(objective.NumExamples());
  for (size_t i = 0; i < lot.size(); ++i) {
    if (lot[i] < 0 || lot[i] >= n) {
      return absl::OutOfRangeError(
          absl::StrCat("lot index ", lot[i], " outside [0, ", n, ")"));
    }
    if (i > 0 && lot[i] <= lot[i - 1]) {
      return absl::InvalidArgumentError("lot indices must be sorted and distinct");
    }
  }

  StepTrace trace;
  trace.lot_indices.assign(lot.begin(), lot.end());
  trace.preclip_norms.resize(lot.size());
  trace.postclip_norms.resize(lot.size());
  trace.losses.resize(lot.size());

  const size_t chunk = static_cast<size_t>(config.accumulation_chunk);
  std::vector<double> total(dim, 0.0);
  std::vector<double> rows(std::min(chunk, lot.size()) * dim);
  const std::span<const double> params(state.params);
  const double clip = config.clip_bound;

  for (size_t begin = 0; begin < lot.size(); begin += chunk) {
    const size_t count = std::min(chunk, lot.size() - begin);
    auto work = [&](size_t worker, size_t workers) {
      for (size_t r = worker; r < count; r += workers) {
        std::span<double> grad(rows.data() + r * dim, dim);
        const size_t slot = begin + r;
        trace.losses[slot] = objective.LossAndGradient(
            params, static_cast<size_t>(lot[slot]), grad);
        const double norm = L2Norm(grad);
        const double divisor = std::max(1.0, norm / clip);
        if (divisor > 1.0) {
          for (double& x : grad) x /= divisor;
        }
        trace.preclip_norms[slot] = norm;
        trace.postclip_norms[slot] = norm / divisor;
      }
    };
    const size_t workers =
        std::min<size_t>(static_cast<size_t>(config.num_threads), count);
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }
    TreeReduce(rows, count, dim);
    for (size_t k = 0; k < dim; ++k) total[k] += rows[k];
  }

  if (config.noise_multiplier > 0.0) {
    std::vector<double> noise =
        DrawNoise(dim, config.noise_multiplier, clip, state.rng.noise);
    trace.noise_norm = L2Norm(noise);
    for (size_t k = 0; k < dim; ++k) total[k] += noise[k];
  }

  const double scale =
      config.learning_rate / static_cast<double>(config.lot_size);
  double update_sq = 0.0;
  for (size_t k = 0; k < dim; ++k) {
    const double delta = scale * total[k];
    state.params[k] -= delta;
    update_sq += delta * delta;
  }
  trace.update_norm = std::sqrt(update_sq);
  ++state.step;
  return trace;
}

AccountantHook RdpAccountantHook(double delta) {
  return [delta](const MechanismParams& mechanism)
             -> absl::StatusOr<std::optional<PrivacyParams>> {
    if (mechanism.noise_multiplier == 0.0) return std::nullopt;
    absl::StatusOr<PrivacyParams> privacy = AccountDpSgd(mechanism, delta);
    if (!privacy.ok()) return privacy.status();
    return std::optional<PrivacyParams>(*privacy);
  };
}

absl::StatusOr<TrainResult> Train(
    const DifferentiableObjective& objective, std::vector<double> initial_params,
    const DpSgdConfig& config, const AccountantHook& accountant,
    const std::function<void(const StepTrace&)>& on_step) {
  if (absl::Status status = ValidateConfig(config); !status.ok()) return status;
  if (objective.NumExamples() == 0) {
    return absl::InvalidArgumentError("cannot train on an empty dataset");
  }
  if (static_cast<int64_t>(objective.NumExamples()) != config.dataset_size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "config dataset size ", config.dataset_size, " does not match the ",
        objective.NumExamples(), " examples bound into the objective"));
  }

  const int64_t steps = config.steps();
  const double q = config.sampling_rate();
  TrainResult result;
  if (accountant) {
    absl::StatusOr<std::optional<PrivacyParams>> privacy =
        accountant(MechanismParams{config.noise_multiplier, q, steps});
    if (!privacy.ok()) return privacy.status();
    result.privacy = *privacy;
  }

  result.state = MakeTrainState(std::move(initial_params), config.seed);
  result.history.reserve(steps);
  for (int64_t t = 0; t < steps; ++t) {
    std::vector<int64_t> lot =
        PoissonSample(config.dataset_size, q, result.state.rng.sampling);
    absl::StatusOr<StepTrace> trace =
        NoisyLotUpdate(result.state, objective, lot, config);
    if (!trace.ok()) return trace.status();
    result.history.push_back(Summarize(*trace, t, config.clip_bound));
    if (on_step) on_step(*trace);
  }
  return result;
}

std::string LossHistoryCsvHeader() {
  return CsvLine({"step", "lot_size_realized", "mean_loss", "mean_preclip_norm",
                  "frac_clipped"});
}

std::string LossHistoryCsvRow(const StepSummary& summary) {
  return CsvLine({absl::StrCat(summary.step),
                  absl::StrCat(summary.lot_size_realized),
                  FormatDouble(summary.mean_loss),
                  FormatDouble(summary.mean_preclip_norm),
                  FormatDouble(summary.frac_clipped)});
}

}  // namespace dpgran
