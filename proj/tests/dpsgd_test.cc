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

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "dpgran/logistic.h"
#include "gtest/gtest.h"

namespace dpgran {
namespace {

std::vector<LogisticExample> RandomLogisticData(int n, int d, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::vector<LogisticExample> data(n);
  for (LogisticExample& ex : data) {
    ex.features.resize(d);
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      ex.features[k] = gaussian(rng);
      s += (k + 1) * ex.features[k];
    }
    ex.label = s + 0.5 * gaussian(rng) > 0 ? 1 : 0;
  }
  return data;
}

// Hand-written logistic gradient: (sigmoid(w.x + b) - y) * [x, 1].
std::vector<double> OracleGradient(const std::vector<double>& params,
                                   const LogisticExample& ex) {
  const size_t d = ex.features.size();
  double z = params[d];
  for (size_t k = 0; k < d; ++k) z += params[k] * ex.features[k];
  const double residual = 1.0 / (1.0 + std::exp(-z)) - ex.label;
  std::vector<double> g(d + 1);
  for (size_t k = 0; k < d; ++k) g[k] = residual * ex.features[k];
  g[d] = residual;
  return g;
}

double OracleLoss(const std::vector<double>& params, const LogisticExample& ex) {
  const size_t d = ex.features.size();
  double z = params[d];
  for (size_t k = 0; k < d; ++k) z += params[k] * ex.features[k];
  const double p = 1.0 / (1.0 + std::exp(-z));
  return ex.label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

TEST(PoissonSampleTest, Extremes) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(PoissonSample(100, 0.0, rng).empty());
  std::vector<int64_t> all = PoissonSample(100, 1.0, rng);
  ASSERT_EQ(all.size(), 100u);
  for (int64_t i = 0; i < 100; ++i) EXPECT_EQ(all[i], i);
}

TEST(PoissonSampleTest, DistinctSortedIndices) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int64_t> lot = PoissonSample(1000, 0.3, rng);
    for (size_t i = 1; i < lot.size(); ++i) EXPECT_LT(lot[i - 1], lot[i]);
  }
}

TEST(PoissonSampleTest, MeanLotSize) {
  std::mt19937_64 rng(12345);
  const int trials = 100000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) total += PoissonSample(10000, 0.05, rng).size();
  EXPECT_NEAR(total / trials, 500.0, 5.0);
}

TEST(ClipGradientTest, Examples) {
  std::vector<double> big = {6.0, 8.0};  // norm 10
  std::vector<double> clipped = ClipGradient(big, 1.0);
  EXPECT_NEAR(L2Norm(clipped), 1.0, 1e-15);
  EXPECT_NEAR(clipped[0] / clipped[1], 0.75, 1e-15);

  std::vector<double> small = {0.3, 0.4};  // norm 0.5
  EXPECT_EQ(ClipGradient(small, 1.0), small);

  std::vector<double> g = ClipGradient(std::vector<double>{3.0, 4.0}, 2.5);
  EXPECT_DOUBLE_EQ(g[0], 1.5);
  EXPECT_DOUBLE_EQ(g[1], 2.0);
}

TEST(ClipGradientTest, NormNeverExceedsBound) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gaussian(0.0, 3.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> g(17);
    for (double& x : g) x = gaussian(rng);
    const double c = 0.1 + (t % 7);
    EXPECT_LE(L2Norm(ClipGradient(g, c)), c + 1e-9);
  }
}

TEST(ValidateConfigTest, Invariants) {
  DpSgdConfig ok{1.0, 1.0, 4, 10, 1.0, 0.1, 0, 2, 1};
  EXPECT_TRUE(ValidateConfig(ok).ok());
  DpSgdConfig big_lot = ok;
  big_lot.lot_size = 11;
  EXPECT_FALSE(ValidateConfig(big_lot).ok());
  DpSgdConfig zero_clip = ok;
  zero_clip.clip_bound = 0.0;
  EXPECT_FALSE(ValidateConfig(zero_clip).ok());
  DpSgdConfig negative_sigma = ok;
  negative_sigma.noise_multiplier = -1.0;
  EXPECT_FALSE(ValidateConfig(negative_sigma).ok());
  DpSgdConfig empty = ok;
  empty.dataset_size = 0;
  EXPECT_FALSE(ValidateConfig(empty).ok());
}

TEST(NoisyLotUpdateTest, FullBatchWithoutNoiseIsSgdStep) {
  std::vector<LogisticExample> data = RandomLogisticData(32, 3, 7);
  LogisticObjective objective(data);
  std::vector<double> init = {0.1, -0.2, 0.3, 0.05};
  DpSgdConfig config{1e6, 0.0, 32, 32, 1.0, 0.5, 9, 5, 1};
  TrainState state = MakeTrainState(init, config.seed);
  std::vector<int64_t> lot(32);
  for (int i = 0; i < 32; ++i) lot[i] = i;
  ASSERT_TRUE(NoisyLotUpdate(state, objective, lot, config).ok());

  std::vector<double> expected = init;
  std::vector<double> sum(4, 0.0);
  for (const LogisticExample& ex : data) {
    std::vector<double> g = OracleGradient(init, ex);
    for (int k = 0; k < 4; ++k) sum[k] += g[k];
  }
  for (int k = 0; k < 4; ++k) {
    expected[k] -= 0.5 / 32.0 * sum[k];
    EXPECT_NEAR(state.params[k], expected[k], 1e-10);
  }
  EXPECT_EQ(state.step, 1);
}

TEST(NoisyLotUpdateTest, EmptyLotIsPureNoise) {
  std::vector<LogisticExample> data = RandomLogisticData(8, 2, 1);
  LogisticObjective objective(data);
  DpSgdConfig config{2.0, 1.5, 4, 8, 1.0, 1.0, 77, 4, 1};
  TrainState state = MakeTrainState({0.0, 0.0, 0.0}, config.seed);
  ASSERT_TRUE(NoisyLotUpdate(state, objective, {}, config).ok());

  std::mt19937_64 replay = DpSgdRng::FromSeed(77).noise;
  std::normal_distribution<double> gaussian(0.0, 1.5 * 2.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(state.params[k], -gaussian(replay) / 4.0);
  }
}

TEST(NoisyLotUpdateTest, TwoExampleHandComputedStep) {
  // x1 = (1, 2), y1 = 1; x2 = (-1, 0.5), y2 = 0; theta = 0.
  // At theta = 0 every residual is sigmoid(0) - y = -0.5 or 0.5.
  // g1 = -0.5 * (1, 2, 1) has norm 0.5 * sqrt(6) > 1, so it is scaled to unit
  // norm; g2 = 0.5 * (-1, 0.5, 1) has norm 0.75 and is kept.
  std::vector<LogisticExample> data = {{{1.0, 2.0}, 1}, {{-1.0, 0.5}, 0}};
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 1.0, 2, 2, 1.0, 0.1, 2024, 1, 1};
  TrainState state = MakeTrainState({0.0, 0.0, 0.0}, config.seed);
  std::vector<int64_t> lot = {0, 1};
  auto trace = NoisyLotUpdate(state, objective, lot, config);
  ASSERT_TRUE(trace.ok());

  const double inv = 1.0 / std::sqrt(6.0);
  const double g1[3] = {-inv, -2.0 * inv, -inv};
  const double g2[3] = {-0.5, 0.25, 0.5};
  std::mt19937_64 replay = DpSgdRng::FromSeed(2024).noise;
  std::normal_distribution<double> gaussian(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    const double noise = gaussian(replay);
    EXPECT_NEAR(state.params[k], -0.1 / 2.0 * (g1[k] + g2[k] + noise), 1e-15);
  }
  EXPECT_NEAR(trace->preclip_norms[0], 0.5 * std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(trace->postclip_norms[0], 1.0, 1e-15);
  EXPECT_NEAR(trace->postclip_norms[1], 0.75, 1e-15);
}

TEST(NoisyLotUpdateTest, ChunkingAndThreadsDoNotChangeTheUpdate) {
  std::vector<LogisticExample> data = RandomLogisticData(40, 5, 11);
  LogisticObjective objective(data);
  std::vector<int64_t> lot;
  for (int i = 0; i < 40; i += 2) lot.push_back(i);
  std::vector<double> reference;
  for (int64_t chunk : {1, 3, 7, 20, 64}) {
    for (int threads : {1, 3}) {
      DpSgdConfig config{0.8, 1.0, 20, 40, 1.0, 0.3, 5, chunk, threads};
      TrainState state = MakeTrainState(std::vector<double>(6, 0.1), 5);
      ASSERT_TRUE(NoisyLotUpdate(state, objective, lot, config).ok());
      if (reference.empty()) {
        reference = state.params;
      } else {
        for (size_t k = 0; k < reference.size(); ++k) {
          EXPECT_NEAR(state.params[k], reference[k], 1e-9);
        }
      }
    }
  }
}

TEST(NoisyLotUpdateTest, RejectsBadInput) {
  std::vector<LogisticExample> data = RandomLogisticData(4, 2, 1);
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 0.0, 2, 4, 1.0, 0.1, 0, 1, 1};
  TrainState wrong_size = MakeTrainState({0.0, 0.0}, 0);
  std::vector<int64_t> lot = {0};
  EXPECT_FALSE(NoisyLotUpdate(wrong_size, objective, lot, config).ok());
  TrainState state = MakeTrainState({0.0, 0.0, 0.0}, 0);
  std::vector<int64_t> out_of_range = {4};
  EXPECT_FALSE(NoisyLotUpdate(state, objective, out_of_range, config).ok());
  std::vector<int64_t> duplicate = {1, 1};
  EXPECT_FALSE(NoisyLotUpdate(state, objective, duplicate, config).ok());
}

TEST(DrawNoiseTest, EmpiricalMoments) {
  std::mt19937_64 rng(99);
  const int draws = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = DrawNoise(1, 1.0, 1.0, rng)[0] / 100.0;
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / draws;
  const double std = std::sqrt(sum_sq / draws - mean * mean);
  EXPECT_NEAR(std, 0.01, 0.0002);
  EXPECT_LT(std::abs(mean), 3.0 * 0.01 / std::sqrt(draws));
}

TEST(TrainTest, OneEpochOfFullLotIsOneStep) {
  std::vector<LogisticExample> data = RandomLogisticData(10, 2, 1);
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 0.0, 10, 10, 1.0, 0.1, 0, 10, 1};
  auto result = Train(objective, {0.0, 0.0, 0.0}, config, nullptr);
  ASSERT_TRUE(result.ok());
  EXPECT_EQ(result->state.step, 1);
  EXPECT_EQ(result->history.size(), 1u);
  EXPECT_FALSE(result->privacy.has_value());
}

TEST(TrainTest, MatchesVanillaSgdAndLossDecreases) {
  std::vector<LogisticExample> data = RandomLogisticData(32, 3, 21);
  LogisticObjective objective(data);
  DpSgdConfig config{1e6, 0.0, 32, 32, 10.0, 0.5, 4, 8, 1};
  std::vector<double> oracle(4, 0.0);
  std::vector<double> oracle_losses;
  for (int step = 0; step < 10; ++step) {
    double loss = 0.0;
    std::vector<double> sum(4, 0.0);
    for (const LogisticExample& ex : data) {
      loss += OracleLoss(oracle, ex);
      std::vector<double> g = OracleGradient(oracle, ex);
      for (int k = 0; k < 4; ++k) sum[k] += g[k];
    }
    oracle_losses.push_back(loss / 32.0);
    for (int k = 0; k < 4; ++k) oracle[k] -= 0.5 / 32.0 * sum[k];
  }
  auto result = Train(objective, std::vector<double>(4, 0.0), config, nullptr);
  ASSERT_TRUE(result.ok());
  ASSERT_EQ(result->history.size(), 10u);
  for (int step = 0; step < 10; ++step) {
    EXPECT_NEAR(result->history[step].mean_loss, oracle_losses[step], 1e-12);
    if (step > 0) {
      EXPECT_LT(result->history[step].mean_loss,
                result->history[step - 1].mean_loss);
    }
  }
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(result->state.params[k], oracle[k], 1e-12);
}

TEST(TrainTest, SameSeedIsBitIdentical) {
  std::vector<LogisticExample> data = RandomLogisticData(50, 4, 3);
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 1.3, 5, 50, 3.0, 0.2, 42, 2, 1};
  auto a = Train(objective, std::vector<double>(5, 0.0), config, nullptr);
  config.num_threads = 2;
  auto b = Train(objective, std::vector<double>(5, 0.0), config, nullptr);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(a->state.params, b->state.params);
  ASSERT_EQ(a->history.size(), b->history.size());
  for (size_t i = 0; i < a->history.size(); ++i) {
    EXPECT_EQ(a->history[i].mean_loss, b->history[i].mean_loss);
    EXPECT_EQ(a->history[i].lot_size_realized, b->history[i].lot_size_realized);
  }
}

TEST(TrainTest, PostClipNormsRespectBoundEveryStep) {
  std::vector<LogisticExample> data = RandomLogisticData(64, 6, 8);
  LogisticObjective objective(data);
  DpSgdConfig config{0.3, 1.0, 16, 64, 5.0, 1.0, 1, 4, 1};
  size_t checked = 0;
  auto on_step = [&](const StepTrace& trace) {
    std::set<int64_t> distinct(trace.lot_indices.begin(), trace.lot_indices.end());
    EXPECT_EQ(distinct.size(), trace.lot_indices.size());
    for (double norm : trace.postclip_norms) {
      EXPECT_LE(norm, 0.3 + 1e-9);
      ++checked;
    }
  };
  ASSERT_TRUE(Train(objective, std::vector<double>(7, 0.0), config, nullptr,
                    on_step)
                  .ok());
  EXPECT_GT(checked, 200u);
}

TEST(TrainTest, AccountantHookReportsPrivacy) {
  std::vector<LogisticExample> data = RandomLogisticData(100, 2, 2);
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 1.0, 10, 100, 1.0, 0.1, 0, 10, 1};
  auto result = Train(objective, {0.0, 0.0, 0.0}, config, RdpAccountantHook(1e-5));
  ASSERT_TRUE(result.ok());
  ASSERT_TRUE(result->privacy.has_value());
  EXPECT_GT(result->privacy->epsilon, 0.0);
  EXPECT_EQ(result->privacy->delta, 1e-5);
}

TEST(TrainTest, RejectsMismatchedDatasetSize) {
  std::vector<LogisticExample> data = RandomLogisticData(10, 2, 1);
  LogisticObjective objective(data);
  DpSgdConfig config{1.0, 0.0, 5, 11, 1.0, 0.1, 0, 5, 1};
  EXPECT_FALSE(Train(objective, {0.0, 0.0, 0.0}, config, nullptr).ok());
}

TEST(LossHistoryCsvTest, HeaderColumns) {
  EXPECT_EQ(LossHistoryCsvHeader(),
            "step,lot_size_realized,mean_loss,mean_preclip_norm,frac_clipped\n");
}

TEST(LogisticTest, ZeroModelLossIsLogTwo) {
  LogisticModel model{{0.0, 0.0}, 0.0};
  std::vector<double> x = {1.5, -2.0};
  EXPECT_NEAR(LogisticLossGrad(model, x, 1).loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(LogisticLossGrad(model, x, 0).loss, std::log(2.0), 1e-15);
}

TEST(LogisticTest, FlattenRoundTrip) {
  LogisticModel model{{1.0, 2.0, 3.0}, -4.0};
  std::vector<double> flat = model.Flatten();
  EXPECT_EQ(flat, (std::vector<double>{1.0, 2.0, 3.0, -4.0}));
  LogisticModel back = LogisticModel::Unflatten(flat);
  EXPECT_EQ(back.weights, model.weights);
  EXPECT_EQ(back.bias, model.bias);
}

TEST(LogisticTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gaussian(0.0, 1.0);
  for (int instance = 0; instance < 100; ++instance) {
    const int d = 1 + instance % 6;
    std::vector<LogisticExample> data = RandomLogisticData(1, d, instance);
    LogisticObjective objective(data);
    std::vector<double> params(d + 1);
    for (double& p : params) p = gaussian(rng);
    std::vector<double> grad(d + 1);
    objective.LossAndGradient(params, 0, grad);
    for (int k = 0; k <= d; ++k) {
      std::vector<double> plus = params;
      std::vector<double> minus = params;
      plus[k] += 1e-5;
      minus[k] -= 1e-5;
      const double numeric =
          (objective.Loss(plus, 0) - objective.Loss(minus, 0)) / 2e-5;
      if (std::abs(grad[k]) > 1e-6) {
        EXPECT_NEAR(numeric / grad[k], 1.0, 1e-4);
      }
    }
  }
}

}  // namespace
}  // namespace dpgran
