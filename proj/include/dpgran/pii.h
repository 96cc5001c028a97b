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

#ifndef DPGRAN_PII_H_
#define DPGRAN_PII_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/corpus.h"

namespace dpgran {

enum class PiiCategory { kPerson, kOrg, kEmail, kUrl, kPhone, kOrderNumber };

// "PERSON", "ORG", "EMAIL", "URL", "PHONE", "ORDER_NUMBER".
std::string_view PiiCategoryName(PiiCategory category);
absl::StatusOr<PiiCategory> ParsePiiCategory(std::string_view name);

// A detected entity. [start, end) are byte offsets into the UTF-8 text.
struct PiiSpan {
  PiiCategory category = PiiCategory::kPerson;
  std::string surface;
  size_t start = 0;
  size_t end = 0;
};

// One inserted PII value, located in the target text of an utterance.
struct PiiLedgerEntry {
  std::string dialogue_id;
  PiiCategory category = PiiCategory::kPerson;
  std::string value;
  int turn = 0;
  size_t char_start = 0;
  size_t char_end = 0;
};

std::string LedgerToJsonl(std::span<const PiiLedgerEntry> ledger);
absl::StatusOr<std::vector<PiiLedgerEntry>> ParseLedgerJsonl(
    std::string_view contents);

// Known person and organization names, matched verbatim.
struct Gazetteer {
  std::vector<std::string> persons;
  std::vector<std::string> orgs;

  static Gazetteer FromLedger(std::span<const PiiLedgerEntry> ledger);
};

// Regex detection of EMAIL, URL, PHONE and ORDER_NUMBER plus exact gazetteer
// matches for PERSON and ORG. Overlaps are resolved left to right, longest
// match first; returned spans never overlap.
std::vector<PiiSpan> DetectPii(std::string_view text, const Gazetteer& gazetteer);

std::string SpansToJsonl(std::string_view unit_id,
                         std::span<const PiiSpan> spans);

struct LeakageReport {
  int64_t detected_pii_count = 0;
  int64_t total_pii_count = 0;
  // Sampled-member units with at least one span, and how many of them are
  // true positives.
  int64_t detected_unit_count = 0;
  int64_t total_unit_count = 0;
  // detected / total; meaningless when `defined` is false (total == 0).
  double leakage_fraction = 0.0;
  bool defined = false;
};

// Share of the PII spans in the sampled members' target texts that sit in
// true-positive units. Fails when a true positive is not a sampled member.
absl::StatusOr<LeakageReport> LeakagePercentage(
    std::span<const ParallelUnit> true_positives,
    std::span<const ParallelUnit> sampled_members, const Gazetteer& gazetteer);

enum class PrivacyVerdict { kPass, kFail };

std::string_view VerdictName(PrivacyVerdict verdict);

inline constexpr double kLeakageVerdictThreshold = 0.5;

// Pass iff leakage_fraction < 0.5. Undefined leakage is an error.
absl::StatusOr<PrivacyVerdict> JudgePrivacy(const LeakageReport& report);

// CSV row: run_id,model_tag,epsilon,detected,total,leakage_pct,verdict.
// The verdict column reads "undefined" when no PII was present.
std::string LeakageCsvHeader();
std::string LeakageCsvRow(const std::string& run_id, const std::string& model_tag,
                          double epsilon, const LeakageReport& report);

}  // namespace dpgran

#endif  // DPGRAN_PII_H_
