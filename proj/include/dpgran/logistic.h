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

#ifndef DPGRAN_LOGISTIC_H_
#define DPGRAN_LOGISTIC_H_

#include <span>
#include <vector>

#include "dpgran/dpsgd.h"

namespace dpgran {

struct LogisticExample {
  std::vector<double> features;
  int label = 0;  // 0 or 1
};

// Parameters are laid out as [w_0 .. w_{d-1}, bias].
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::vector<double> Flatten() const;
  static LogisticModel Unflatten(std::span<const double> params);
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Binary cross-entropy of sigmoid(w.x + b); gradient is (p - y) [x, 1].
LossAndGrad LogisticLossGrad(const LogisticModel& model,
                             std::span<const double> x, int y);

class LogisticObjective : public DifferentiableObjective {
 public:
  explicit LogisticObjective(std::vector<LogisticExample> examples);

  size_t NumParameters() const override { return dimension_ + 1; }
  size_t NumExamples() const override { return examples_.size(); }
  double Loss(std::span<const double> params, size_t example) const override;
  double LossAndGradient(std::span<const double> params, size_t example,
                         std::span<double> grad) const override;

  const std::vector<LogisticExample>& examples() const { return examples_; }

 private:
  std::vector<LogisticExample> examples_;
  size_t dimension_ = 0;
};

}  // namespace dpgran

#endif  // DPGRAN_LOGISTIC_H_
