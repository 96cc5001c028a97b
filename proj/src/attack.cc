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

#include "dpgran/attack.h"

#include <algorithm>
#include <iterator>
#include <random>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"
#include "json.hpp"

namespace dpgran {

absl::StatusOr<Threshold> ComputeTau(std::span<const double> train_losses,
                                     std::string provenance) {
  if (train_losses.empty()) {
    return absl::InvalidArgumentError("tau needs a non-empty training set");
  }
  double sum = 0.0;
  for (double loss : train_losses) sum += loss;
  return Threshold{sum / static_cast<double>(train_losses.size()),
                   std::move(provenance)};
}

absl::StatusOr<Threshold> ComputeTau(const UnitLossFn& model,
                                     std::span<const ParallelUnit> train_units,
                                     std::string provenance) {
  std::vector<double> losses;
  losses.reserve(train_units.size());
  for (const ParallelUnit& unit : train_units) losses.push_back(model(unit));
  return ComputeTau(losses, std::move(provenance));
}

absl::StatusOr<std::vector<ParallelUnit>> BalancedMembers(
    std::span<const ParallelUnit> train_units, size_t n, uint64_t seed) {
  if (n > train_units.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot draw ", n, " members from ", train_units.size(),
                     " training units"));
  }
  std::vector<ParallelUnit> sample;
  sample.reserve(n);
  std::mt19937_64 rng(seed);
  std::sample(train_units.begin(), train_units.end(),
              std::back_inserter(sample), n, rng);
  return sample;
}

MiaReport Classify(std::span<const LossRecord> records, const Threshold& tau) {
  MiaReport report;
  report.threshold = tau;
  for (const LossRecord& record : records) {
    const bool predicted_member = record.loss <= tau.tau;
    if (record.label == Membership::kMember) {
      if (predicted_member) {
        ++report.tp;
        report.true_positive_ids.push_back(record.unit_id);
      } else {
        ++report.fn;
      }
    } else if (predicted_member) {
      ++report.fp;
    } else {
      ++report.tn;
    }
  }
  std::sort(report.true_positive_ids.begin(), report.true_positive_ids.end());
  const int64_t positives = report.tp + report.fn;
  const int64_t negatives = report.fp + report.tn;
  report.tpr = positives > 0
                   ? static_cast<double>(report.tp) / static_cast<double>(positives)
                   : 0.0;
  report.fpr = negatives > 0
                   ? static_cast<double>(report.fp) / static_cast<double>(negatives)
                   : 0.0;
  report.advantage = report.tpr - report.fpr;
  return report;
}

absl::StatusOr<MiaReport> AttackModel(const UnitLossFn& model,
                                      std::span<const ParallelUnit> members,
                                      std::span<const ParallelUnit> nonmembers,
                                      const Threshold& tau) {
  if (members.size() != nonmembers.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unbalanced attack: ", members.size(), " members vs ",
                     nonmembers.size(), " nonmembers"));
  }
  if (members.empty()) {
    return absl::InvalidArgumentError("attack needs at least one record");
  }
  std::set<std::string> member_ids;
  for (const ParallelUnit& unit : members) member_ids.insert(unit.unit_id);
  std::vector<LossRecord> records;
  records.reserve(members.size() + nonmembers.size());
  for (const ParallelUnit& unit : members) {
    records.push_back({unit.unit_id, Membership::kMember, model(unit)});
  }
  for (const ParallelUnit& unit : nonmembers) {
    if (member_ids.contains(unit.unit_id)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unit ", unit.unit_id, " is both member and nonmember"));
    }
    records.push_back({unit.unit_id, Membership::kNonmember, model(unit)});
  }
  return Classify(records, tau);
}

std::string MiaCsvHeader() {
  return CsvLine({"run_id", "model_tag", "epsilon", "tau", "tp", "fp", "tn",
                  "fn", "tpr", "fpr", "advantage"});
}

std::string MiaCsvRow(const std::string& run_id, const std::string& model_tag,
                      double epsilon, const MiaReport& report) {
  return CsvLine({run_id, model_tag, FormatDouble(epsilon),
                  FormatDouble(report.threshold.tau), absl::StrCat(report.tp),
                  absl::StrCat(report.fp), absl::StrCat(report.tn),
                  absl::StrCat(report.fn), FormatDouble(report.tpr),
                  FormatDouble(report.fpr), FormatDouble(report.advantage)});
}

std::string TruePositivesToJsonl(const MiaReport& report) {
  std::string out;
  for (const std::string& id : report.true_positive_ids) {
    out += nlohmann::json{{"unit_id", id}}.dump();
    out += '\n';
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> ParseTruePositivesJsonl(
    std::string_view contents) {
  std::vector<std::string> ids;
  size_t pos = 0;
  int line = 0;
  while (pos < contents.size()) {
    size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view text = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (text.empty()) continue;
    nlohmann::json object = nlohmann::json::parse(text, nullptr, false);
    if (object.is_discarded() || !object.is_object() ||
        !object.contains("unit_id") || !object["unit_id"].is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line, ": expected {\"unit_id\": string}"));
    }
    ids.push_back(object["unit_id"].get<std::string>());
  }
  return ids;
}

}  // namespace dpgran
