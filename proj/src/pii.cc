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

#include "dpgran/pii.h"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"
#include "json.hpp"

namespace dpgran {
namespace {

constexpr std::pair<PiiCategory, std::string_view> kCategoryNames[] = {
    {PiiCategory::kPerson, "PERSON"},   {PiiCategory::kOrg, "ORG"},
    {PiiCategory::kEmail, "EMAIL"},     {PiiCategory::kUrl, "URL"},
    {PiiCategory::kPhone, "PHONE"},     {PiiCategory::kOrderNumber, "ORDER_NUMBER"},
};

bool IsWordByte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
         (u >= 'A' && u <= 'Z') || c == '_';
}

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

struct Pattern {
  PiiCategory category;
  std::regex regex;
};

const std::vector<Pattern>& Patterns() {
  static const auto* patterns = new std::vector<Pattern>{
      {PiiCategory::kEmail,
       std::regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})")},
      {PiiCategory::kUrl,
       std::regex(R"((https?://|www\.)[^\s<>"]+)", std::regex::icase)},
      // International form with a leading +, then a localized form with a
      // trunk 0 and at least one separator.
      {PiiCategory::kPhone,
       std::regex(R"(\+\d{1,3}([ /-]?\(?\d{1,5}\)?){1,5}\d)")},
      {PiiCategory::kPhone, std::regex(R"(\(?0\d{1,5}\)?[ /-]\d{2,}([ -]\d{2,})*)")},
      {PiiCategory::kOrderNumber,
       std::regex("\\d{3}(\\d|\\.|\xE2\x80\xA6)*")},
  };
  return *patterns;
}

// Drops sentence punctuation that a greedy URL match swallowed.
size_t TrimUrlEnd(std::string_view text, size_t start, size_t end) {
  while (end > start) {
    const char c = text[end - 1];
    if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' ||
        c == ')' || c == '\'') {
      --end;
    } else {
      break;
    }
  }
  return end;
}

// "12345." ends a sentence; "160....." keeps its elision dots.
size_t TrimOrderEnd(std::string_view text, size_t start, size_t end) {
  if (end - start >= 2 && text[end - 1] == '.' && IsDigit(text[end - 2])) {
    return end - 1;
  }
  return end;
}

void AddGazetteerMatches(std::string_view text,
                         const std::vector<std::string>& names,
                         PiiCategory category, std::vector<PiiSpan>& out) {
  for (const std::string& name : names) {
    if (name.empty()) continue;
    size_t pos = text.find(name);
    while (pos != std::string_view::npos) {
      const size_t end = pos + name.size();
      const bool left_ok = pos == 0 || !IsWordByte(text[pos - 1]);
      const bool right_ok = end == text.size() || !IsWordByte(text[end]);
      if (left_ok && right_ok) {
        out.push_back({category, name, pos, end});
      }
      pos = text.find(name, pos + 1);
    }
  }
}

}  // namespace

std::string_view PiiCategoryName(PiiCategory category) {
  for (const auto& [value, name] : kCategoryNames) {
    if (value == category) return name;
  }
  return "UNKNOWN";
}

absl::StatusOr<PiiCategory> ParsePiiCategory(std::string_view name) {
  for (const auto& [value, known] : kCategoryNames) {
    if (known == name) return value;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown PII category '", std::string(name), "'"));
}

std::string LedgerToJsonl(std::span<const PiiLedgerEntry> ledger) {
  std::string out;
  for (const PiiLedgerEntry& entry : ledger) {
    nlohmann::ordered_json object;
    object["dialogue_id"] = entry.dialogue_id;
    object["category"] = std::string(PiiCategoryName(entry.category));
    object["value"] = entry.value;
    object["turn"] = entry.turn;
    object["char_start"] = entry.char_start;
    object["char_end"] = entry.char_end;
    out += object.dump();
    out += '\n';
  }
  return out;
}

absl::StatusOr<std::vector<PiiLedgerEntry>> ParseLedgerJsonl(
    std::string_view contents) {
  std::vector<PiiLedgerEntry> ledger;
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
    if (object.is_discarded() || !object.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("ledger line ", line, ": not a JSON object"));
    }
    try {
      PiiLedgerEntry entry;
      entry.dialogue_id = object.at("dialogue_id").get<std::string>();
      auto category = ParsePiiCategory(object.at("category").get<std::string>());
      if (!category.ok()) return category.status();
      entry.category = *category;
      entry.value = object.at("value").get<std::string>();
      entry.turn = object.at("turn").get<int>();
      entry.char_start = object.at("char_start").get<size_t>();
      entry.char_end = object.at("char_end").get<size_t>();
      ledger.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("ledger line ", line, ": ", e.what()));
    }
  }
  return ledger;
}

Gazetteer Gazetteer::FromLedger(std::span<const PiiLedgerEntry> ledger) {
  std::set<std::string> persons;
  std::set<std::string> orgs;
  for (const PiiLedgerEntry& entry : ledger) {
    if (entry.category == PiiCategory::kPerson) persons.insert(entry.value);
    if (entry.category == PiiCategory::kOrg) orgs.insert(entry.value);
  }
  return {{persons.begin(), persons.end()}, {orgs.begin(), orgs.end()}};
}

std::vector<PiiSpan> DetectPii(std::string_view text,
                               const Gazetteer& gazetteer) {
  std::vector<PiiSpan> candidates;
  AddGazetteerMatches(text, gazetteer.persons, PiiCategory::kPerson,
                      candidates);
  AddGazetteerMatches(text, gazetteer.orgs, PiiCategory::kOrg, candidates);

  const char* begin = text.data();
  const char* end = text.data() + text.size();
  for (const Pattern& pattern : Patterns()) {
    for (std::cregex_iterator it(begin, end, pattern.regex), last; it != last;
         ++it) {
      size_t start = static_cast<size_t>(it->position(0));
      size_t stop = start + static_cast<size_t>(it->length(0));
      if (start > 0 && IsWordByte(text[start - 1]) &&
          pattern.category != PiiCategory::kEmail) {
        continue;
      }
      if (pattern.category == PiiCategory::kUrl) {
        stop = TrimUrlEnd(text, start, stop);
      } else if (pattern.category == PiiCategory::kOrderNumber) {
        stop = TrimOrderEnd(text, start, stop);
      }
      if (stop <= start) continue;
      candidates.push_back({pattern.category,
                            std::string(text.substr(start, stop - start)),
                            start, stop});
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const PiiSpan& a, const PiiSpan& b) {
                     if (a.start != b.start) return a.start < b.start;
                     return a.end - a.start > b.end - b.start;
                   });
  std::vector<PiiSpan> spans;
  size_t covered = 0;
  for (PiiSpan& span : candidates) {
    if (span.start < covered) continue;
    covered = span.end;
    spans.push_back(std::move(span));
  }
  return spans;
}

std::string SpansToJsonl(std::string_view unit_id,
                         std::span<const PiiSpan> spans) {
  std::string out;
  for (const PiiSpan& span : spans) {
    nlohmann::ordered_json object;
    object["unit_id"] = std::string(unit_id);
    object["category"] = std::string(PiiCategoryName(span.category));
    object["surface"] = span.surface;
    object["start"] = span.start;
    object["end"] = span.end;
    out += object.dump();
    out += '\n';
  }
  return out;
}

absl::StatusOr<LeakageReport> LeakagePercentage(
    std::span<const ParallelUnit> true_positives,
    std::span<const ParallelUnit> sampled_members,
    const Gazetteer& gazetteer) {
  std::map<std::string, int64_t> spans_per_unit;
  LeakageReport report;
  for (const ParallelUnit& unit : sampled_members) {
    const auto count =
        static_cast<int64_t>(DetectPii(unit.target, gazetteer).size());
    spans_per_unit[unit.unit_id] = count;
    report.total_pii_count += count;
    if (count > 0) ++report.total_unit_count;
  }
  std::set<std::string> seen;
  for (const ParallelUnit& unit : true_positives) {
    auto it = spans_per_unit.find(unit.unit_id);
    if (it == spans_per_unit.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "true positive ", unit.unit_id, " is not a sampled member"));
    }
    if (!seen.insert(unit.unit_id).second) continue;
    report.detected_pii_count += it->second;
    if (it->second > 0) ++report.detected_unit_count;
  }
  report.defined = report.total_pii_count > 0;
  if (report.defined) {
    report.leakage_fraction = static_cast<double>(report.detected_pii_count) /
                              static_cast<double>(report.total_pii_count);
  }
  return report;
}

std::string_view VerdictName(PrivacyVerdict verdict) {
  return verdict == PrivacyVerdict::kPass ? "pass" : "fail";
}

absl::StatusOr<PrivacyVerdict> JudgePrivacy(const LeakageReport& report) {
  if (!report.defined) {
    return absl::FailedPreconditionError(
        "leakage is undefined: the sampled members contain no PII");
  }
  return report.leakage_fraction < kLeakageVerdictThreshold
             ? PrivacyVerdict::kPass
             : PrivacyVerdict::kFail;
}

std::string LeakageCsvHeader() {
  return CsvLine({"run_id", "model_tag", "epsilon", "detected", "total",
                  "leakage_pct", "verdict"});
}

std::string LeakageCsvRow(const std::string& run_id,
                          const std::string& model_tag, double epsilon,
                          const LeakageReport& report) {
  std::string pct;
  std::string verdict = "undefined";
  if (report.defined) {
    pct = FormatDouble(100.0 * report.leakage_fraction);
    verdict = std::string(VerdictName(*JudgePrivacy(report)));
  }
  return CsvLine({run_id, model_tag, FormatDouble(epsilon),
                  absl::StrCat(report.detected_pii_count),
                  absl::StrCat(report.total_pii_count), pct, verdict});
}

}  // namespace dpgran
