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

#ifndef DPGRAN_ATTACK_H_
#define DPGRAN_ATTACK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/corpus.h"

namespace dpgran {

enum class Membership { kMember, kNonmember };

struct LossRecord {
  std::string unit_id;
  Membership label = Membership::kMember;
  double loss = 0.0;
};

// The loss threshold tau and a description of the model it came from. A
// single threshold is shared by every attacked model in an experiment.
struct Threshold {
  double tau = 0.0;
  std::string provenance;
};

struct MiaReport {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;
  double tpr = 0.0;
  double fpr = 0.0;
  // tpr - fpr; negative when the attack does worse than chance.
  double advantage = 0.0;
  Threshold threshold;
  std::vector<std::string> true_positive_ids;
};

// Per-unit loss of the attacked model on a sentence pair.
using UnitLossFn = std::function<double(const ParallelUnit&)>;

// tau = mean loss over the given (full) training set.
absl::StatusOr<Threshold> ComputeTau(std::span<const double> train_losses,
                                     std::string provenance);
absl::StatusOr<Threshold> ComputeTau(const UnitLossFn& model,
                                     std::span<const ParallelUnit> train_units,
                                     std::string provenance);

// Uniform sample of exactly n training units without replacement.
absl::StatusOr<std::vector<ParallelUnit>> BalancedMembers(
    std::span<const ParallelUnit> train_units, size_t n, uint64_t seed);

// Predicts "member" iff loss <= tau.
MiaReport Classify(std::span<const LossRecord> records, const Threshold& tau);

// Scores every member and nonmember with `model` and classifies the losses.
// The two sets must be equally large and disjoint by unit id.
absl::StatusOr<MiaReport> AttackModel(const UnitLossFn& model,
                                      std::span<const ParallelUnit> members,
                                      std::span<const ParallelUnit> nonmembers,
                                      const Threshold& tau);

// CSV row: run_id,model_tag,epsilon,tau,tp,fp,tn,fn,tpr,fpr,advantage.
std::string MiaCsvHeader();
std::string MiaCsvRow(const std::string& run_id, const std::string& model_tag,
                      double epsilon, const MiaReport& report);

// One {"unit_id": ...} object per true positive.
std::string TruePositivesToJsonl(const MiaReport& report);
absl::StatusOr<std::vector<std::string>> ParseTruePositivesJsonl(
    std::string_view contents);

}  // namespace dpgran

#endif  // DPGRAN_ATTACK_H_
