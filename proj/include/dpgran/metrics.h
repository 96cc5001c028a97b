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

#ifndef DPGRAN_METRICS_H_
#define DPGRAN_METRICS_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dpgran {

inline constexpr int kBleuMaxOrder = 4;

struct BleuReport {
  double bleu = 0.0;
  std::array<double, kBleuMaxOrder> precisions{};
  // Orders whose hypothesis side had at least one n-gram; only these enter
  // the geometric mean.
  int effective_order = 0;
  double brevity_penalty = 1.0;
  int64_t hypothesis_length = 0;
  int64_t reference_length = 0;
};

struct BleuOptions {
  // Add-one smoothing on orders 2..4.
  bool smooth = false;
};

// Corpus-level BLEU-4 over whitespace/punctuation tokens with clipped n-gram
// counts and a brevity penalty. One reference per hypothesis.
absl::StatusOr<BleuReport> CorpusBleu(std::span<const std::string> hypotheses,
                                      std::span<const std::string> references,
                                      BleuOptions options = {});

// Pre-tokenized variant.
absl::StatusOr<BleuReport> CorpusBleuTokens(
    std::span<const std::vector<std::string>> hypotheses,
    std::span<const std::vector<std::string>> references,
    BleuOptions options = {});

// Empirical lower bound b of a similarity score, b < 1.
class RescaleBaseline {
 public:
  static absl::StatusOr<RescaleBaseline> Create(double b);
  double value() const { return b_; }

 private:
  explicit RescaleBaseline(double b) : b_(b) {}
  double b_;
};

// max(0, (f - b) / (1 - b)).
double RescaleScore(double f, const RescaleBaseline& baseline);

// Mean of scores computed on randomly paired texts.
absl::StatusOr<RescaleBaseline> EstimateBaseline(std::span<const double> scores);

// CSV row: run_id,model_tag,epsilon,granularity,bleu_x100,p1,p2,p3,p4,bp.
std::string BleuCsvHeader();
std::string BleuCsvRow(const std::string& run_id, const std::string& model_tag,
                       double epsilon, const std::string& granularity,
                       const BleuReport& report);

}  // namespace dpgran

#endif  // DPGRAN_METRICS_H_
