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

#include "dpgran/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"
#include "dpgran/vocab.h"

namespace dpgran {
namespace {

using NgramCounts = std::map<std::vector<std::string>, int64_t>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  const auto size = static_cast<int64_t>(tokens.size());
  for (int64_t i = 0; i + n <= size; ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

absl::StatusOr<BleuReport> CorpusBleuTokens(
    std::span<const std::vector<std::string>> hypotheses,
    std::span<const std::vector<std::string>> references,
    BleuOptions options) {
  if (hypotheses.size() != references.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "BLEU needs one reference per hypothesis: ", hypotheses.size(), " vs ",
        references.size()));
  }
  if (hypotheses.empty()) {
    return absl::InvalidArgumentError("BLEU of an empty corpus");
  }
  std::array<int64_t, kBleuMaxOrder> matches{};
  std::array<int64_t, kBleuMaxOrder> totals{};
  BleuReport report;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    report.hypothesis_length += static_cast<int64_t>(hypotheses[i].size());
    report.reference_length += static_cast<int64_t>(references[i].size());
    for (int n = 1; n <= kBleuMaxOrder; ++n) {
      const NgramCounts hyp = CountNgrams(hypotheses[i], n);
      const NgramCounts ref = CountNgrams(references[i], n);
      for (const auto& [gram, count] : hyp) {
        totals[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  const double c = static_cast<double>(report.hypothesis_length);
  const double r = static_cast<double>(report.reference_length);
  if (report.hypothesis_length == 0) {
    report.brevity_penalty = 0.0;
    return report;
  }
  report.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;

  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    const double m = static_cast<double>(matches[n - 1]);
    const double t = static_cast<double>(totals[n - 1]);
    if (totals[n - 1] == 0) continue;
    ++report.effective_order;
    double p = m / t;
    if (options.smooth && n > 1) p = (m + 1.0) / (t + 1.0);
    report.precisions[n - 1] = p;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  if (zero) {
    report.bleu = 0.0;
  } else {
    report.bleu = report.brevity_penalty *
                  std::exp(log_sum / report.effective_order);
  }
  return report;
}

absl::StatusOr<BleuReport> CorpusBleu(std::span<const std::string> hypotheses,
                                      std::span<const std::string> references,
                                      BleuOptions options) {
  std::vector<std::vector<std::string>> hyp;
  std::vector<std::vector<std::string>> ref;
  hyp.reserve(hypotheses.size());
  ref.reserve(references.size());
  for (const std::string& text : hypotheses) hyp.push_back(Tokenize(text));
  for (const std::string& text : references) ref.push_back(Tokenize(text));
  return CorpusBleuTokens(hyp, ref, options);
}

absl::StatusOr<RescaleBaseline> RescaleBaseline::Create(double b) {
  if (!(b < 1.0) || std::isnan(b)) {
    return absl::InvalidArgumentError(
        absl::StrCat("rescale baseline must be below 1, got ", b));
  }
  return RescaleBaseline(b);
}

double RescaleScore(double f, const RescaleBaseline& baseline) {
  const double b = baseline.value();
  return std::max(0.0, (f - b) / (1.0 - b));
}

absl::StatusOr<RescaleBaseline> EstimateBaseline(
    std::span<const double> scores) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("baseline needs at least one score");
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  return RescaleBaseline::Create(sum / static_cast<double>(scores.size()));
}

std::string BleuCsvHeader() {
  return CsvLine({"run_id", "model_tag", "epsilon", "granularity", "bleu_x100",
                  "p1", "p2", "p3", "p4", "bp"});
}

std::string BleuCsvRow(const std::string& run_id, const std::string& model_tag,
                       double epsilon, const std::string& granularity,
                       const BleuReport& report) {
  std::vector<std::string> fields = {run_id, model_tag, FormatDouble(epsilon),
                                     granularity,
                                     FormatDouble(100.0 * report.bleu)};
  for (double p : report.precisions) fields.push_back(FormatDouble(p));
  fields.push_back(FormatDouble(report.brevity_penalty));
  return CsvLine(fields);
}

}  // namespace dpgran
