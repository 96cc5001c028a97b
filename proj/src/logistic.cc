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

#include "dpgran/logistic.h"

#include <algorithm>
#include <cmath>

namespace dpgran {
namespace {

double Logit(std::span<const double> params, std::span<const double> x) {
  double z = params[x.size()];
  for (size_t i = 0; i < x.size(); ++i) z += params[i] * x[i];
  return z;
}

// log(1 + e^z) - y z, stable for large |z|.
double BinaryCrossEntropy(double z, int y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> LogisticModel::Flatten() const {
  std::vector<double> params = weights;
  params.push_back(bias);
  return params;
}

LogisticModel LogisticModel::Unflatten(std::span<const double> params) {
  LogisticModel model;
  model.weights.assign(params.begin(), params.end() - 1);
  model.bias = params.back();
  return model;
}

LossAndGrad LogisticLossGrad(const LogisticModel& model,
                             std::span<const double> x, int y) {
  const std::vector<double> params = model.Flatten();
  const double z = Logit(params, x);
  LossAndGrad out;
  out.loss = BinaryCrossEntropy(z, y);
  const double residual = Sigmoid(z) - y;
  out.gradient.resize(x.size() + 1);
  for (size_t i = 0; i < x.size(); ++i) out.gradient[i] = residual * x[i];
  out.gradient[x.size()] = residual;
  return out;
}

LogisticObjective::LogisticObjective(std::vector<LogisticExample> examples)
    : examples_(std::move(examples)),
      dimension_(examples_.empty() ? 0 : examples_.front().features.size()) {}

double LogisticObjective::Loss(std::span<const double> params,
                               size_t example) const {
  const LogisticExample& ex = examples_[example];
  return BinaryCrossEntropy(Logit(params, ex.features), ex.label);
}

double LogisticObjective::LossAndGradient(std::span<const double> params,
                                          size_t example,
                                          std::span<double> grad) const {
  const LogisticExample& ex = examples_[example];
  const double z = Logit(params, ex.features);
  const double residual = Sigmoid(z) - ex.label;
  for (size_t i = 0; i < dimension_; ++i) grad[i] = residual * ex.features[i];
  grad[dimension_] = residual;
  return BinaryCrossEntropy(z, ex.label);
}

}  // namespace dpgran
