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

#include "dpgran/corpus.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"
#include "dpgran/vocab.h"
#include "json.hpp"

namespace dpgran {
namespace {

using json = nlohmann::json;

absl::Status LineError(size_t line, std::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("line ", line, ": ", std::string(what)));
}

absl::StatusOr<std::string> StringField(const json& object, const char* key,
                                        size_t line) {
  auto it = object.find(key);
  if (it == object.end()) {
    return LineError(line, absl::StrCat("missing field \"", key, "\""));
  }
  if (!it->is_string()) {
    return LineError(line, absl::StrCat("field \"", key, "\" must be a string"));
  }
  return it->get<std::string>();
}

absl::StatusOr<int> IntField(const json& object, const char* key, size_t line) {
  auto it = object.find(key);
  if (it == object.end()) {
    return LineError(line, absl::StrCat("missing field \"", key, "\""));
  }
  if (!it->is_number_integer()) {
    return LineError(line,
                     absl::StrCat("field \"", key, "\" must be an integer"));
  }
  return it->get<int>();
}

// Calls `fn(object, line_number)` for every non-blank line.
template <typename Fn>
absl::Status ForEachJsonLine(std::string_view contents, Fn fn) {
  size_t line_number = 0;
  size_t pos = 0;
  while (pos <= contents.size()) {
    size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    ++line_number;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == contents.size()) break;
      continue;
    }
    json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (object.is_discarded()) return LineError(line_number, "invalid JSON");
    if (!object.is_object()) {
      return LineError(line_number, "expected a JSON object");
    }
    if (absl::Status status = fn(object, line_number); !status.ok()) {
      return status;
    }
    if (end == contents.size()) break;
  }
  return absl::OkStatus();
}

std::string SpeakerLine(std::string_view speaker, std::string_view text) {
  return absl::StrCat(std::string(speaker), ": ", std::string(text));
}

json UnitToJson(const ParallelUnit& unit) {
  return json{{"dialogue_id", unit.dialogue_id},
              {"turn", unit.turn},
              {"speaker", unit.speaker},
              {"src", unit.source},
              {"tgt", unit.target},
              {"unit_id", unit.unit_id},
              {"granularity", GranularityName(unit.granularity)}};
}

}  // namespace

std::string_view GranularityName(Granularity granularity) {
  return granularity == Granularity::kSentence ? "sentence" : "document";
}

absl::StatusOr<Granularity> ParseGranularity(std::string_view name) {
  if (name == "sentence") return Granularity::kSentence;
  if (name == "document") return Granularity::kDocument;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown granularity \"", std::string(name), "\""));
}

absl::StatusOr<std::vector<Utterance>> ParseUtterancesJsonl(
    std::string_view contents) {
  std::vector<Utterance> utterances;
  std::vector<size_t> lines;
  absl::Status status =
      ForEachJsonLine(contents, [&](const json& object, size_t line) {
        Utterance u;
        absl::StatusOr<std::string> dialogue =
            StringField(object, "dialogue_id", line);
        if (!dialogue.ok()) return dialogue.status();
        absl::StatusOr<int> turn = IntField(object, "turn", line);
        if (!turn.ok()) return turn.status();
        absl::StatusOr<std::string> speaker =
            StringField(object, "speaker", line);
        if (!speaker.ok()) return speaker.status();
        absl::StatusOr<std::string> src = StringField(object, "src", line);
        if (!src.ok()) return src.status();
        absl::StatusOr<std::string> tgt = StringField(object, "tgt", line);
        if (!tgt.ok()) return tgt.status();
        u.dialogue_id = *std::move(dialogue);
        u.turn = *turn;
        u.speaker = *std::move(speaker);
        u.source = *std::move(src);
        u.target = *std::move(tgt);
        utterances.push_back(std::move(u));
        lines.push_back(line);
        return absl::OkStatus();
      });
  if (!status.ok()) return status;

  std::vector<size_t> order(utterances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Utterance& x = utterances[a];
    const Utterance& y = utterances[b];
    if (x.dialogue_id != y.dialogue_id) return x.dialogue_id < y.dialogue_id;
    return x.turn < y.turn;
  });

  std::vector<Utterance> sorted;
  sorted.reserve(utterances.size());
  for (size_t k = 0; k < order.size(); ++k) {
    const Utterance& u = utterances[order[k]];
    const bool first_of_dialogue =
        k == 0 || sorted.back().dialogue_id != u.dialogue_id;
    const int expected = first_of_dialogue ? 0 : sorted.back().turn + 1;
    if (u.turn != expected) {
      return LineError(
          lines[order[k]],
          absl::StrCat("dialogue \"", u.dialogue_id, "\" has turn ", u.turn,
                       " where turn ", expected,
                       " was expected (turns must be dense from 0)"));
    }
    sorted.push_back(u);
  }
  return sorted;
}

absl::StatusOr<std::vector<Utterance>> LoadUtterancesJsonl(
    const std::string& path) {
  absl::StatusOr<std::string> contents = ReadFileToString(path);
  if (!contents.ok()) return contents.status();
  absl::StatusOr<std::vector<Utterance>> parsed =
      ParseUtterancesJsonl(*contents);
  if (!parsed.ok()) {
    return absl::Status(parsed.status().code(),
                        absl::StrCat(path, ": ", parsed.status().message()));
  }
  return parsed;
}

std::string UtterancesToJsonl(std::span<const Utterance> utterances) {
  std::string out;
  for (const Utterance& u : utterances) {
    json object{{"dialogue_id", u.dialogue_id},
                {"turn", u.turn},
                {"speaker", u.speaker},
                {"src", u.source},
                {"tgt", u.target}};
    out += object.dump();
    out += '\n';
  }
  return out;
}

std::string UnitsToJsonl(std::span<const ParallelUnit> units) {
  std::string out;
  for (const ParallelUnit& unit : units) {
    out += UnitToJson(unit).dump();
    out += '\n';
  }
  return out;
}

absl::StatusOr<std::vector<ParallelUnit>> ParseUnitsJsonl(
    std::string_view contents) {
  std::vector<ParallelUnit> units;
  absl::Status status =
      ForEachJsonLine(contents, [&](const json& object, size_t line) {
        ParallelUnit unit;
        absl::StatusOr<std::string> id = StringField(object, "unit_id", line);
        if (!id.ok()) return id.status();
        absl::StatusOr<std::string> level =
            StringField(object, "granularity", line);
        if (!level.ok()) return level.status();
        absl::StatusOr<Granularity> granularity = ParseGranularity(*level);
        if (!granularity.ok()) return LineError(line, "bad granularity");
        absl::StatusOr<std::string> dialogue =
            StringField(object, "dialogue_id", line);
        if (!dialogue.ok()) return dialogue.status();
        absl::StatusOr<int> turn = IntField(object, "turn", line);
        if (!turn.ok()) return turn.status();
        absl::StatusOr<std::string> speaker =
            StringField(object, "speaker", line);
        if (!speaker.ok()) return speaker.status();
        absl::StatusOr<std::string> src = StringField(object, "src", line);
        if (!src.ok()) return src.status();
        absl::StatusOr<std::string> tgt = StringField(object, "tgt", line);
        if (!tgt.ok()) return tgt.status();
        unit.unit_id = *std::move(id);
        unit.granularity = *granularity;
        unit.dialogue_id = *std::move(dialogue);
        unit.turn = *turn;
        unit.speaker = *std::move(speaker);
        unit.source = *std::move(src);
        unit.target = *std::move(tgt);
        units.push_back(std::move(unit));
        return absl::OkStatus();
      });
  if (!status.ok()) return status;
  return units;
}

std::vector<ParallelUnit> ToSentenceUnits(std::span<const Utterance> utterances) {
  std::vector<ParallelUnit> units;
  units.reserve(utterances.size());
  for (const Utterance& u : utterances) {
    ParallelUnit unit;
    unit.unit_id = absl::StrCat("s:", u.dialogue_id, ":", u.turn);
    unit.granularity = Granularity::kSentence;
    unit.dialogue_id = u.dialogue_id;
    unit.turn = u.turn;
    unit.speaker = u.speaker;
    unit.source = SpeakerLine(u.speaker, u.source);
    unit.target = SpeakerLine(u.speaker, u.target);
    units.push_back(std::move(unit));
  }
  return units;
}

std::vector<ParallelUnit> ToDocumentUnits(std::span<const Utterance> utterances) {
  std::vector<ParallelUnit> units;
  for (const Utterance& u : utterances) {
    if (units.empty() || units.back().dialogue_id != u.dialogue_id) {
      ParallelUnit unit;
      unit.unit_id = absl::StrCat("d:", u.dialogue_id);
      unit.granularity = Granularity::kDocument;
      unit.dialogue_id = u.dialogue_id;
      unit.source = SpeakerLine(u.speaker, u.source);
      unit.target = SpeakerLine(u.speaker, u.target);
      units.push_back(std::move(unit));
    } else {
      ParallelUnit& unit = units.back();
      unit.source += kDocumentLineSeparator;
      unit.source += SpeakerLine(u.speaker, u.source);
      unit.target += kDocumentLineSeparator;
      unit.target += SpeakerLine(u.speaker, u.target);
    }
  }
  return units;
}

std::vector<std::string> SplitDocumentLines(std::string_view document) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (true) {
    const size_t end = document.find(kDocumentLineSeparator, pos);
    if (end == std::string_view::npos) {
      lines.emplace_back(document.substr(pos));
      break;
    }
    lines.emplace_back(document.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::vector<ParallelUnit> BuildTokenBudgetDocuments(
    std::span<const SentencePair> pairs, int budget) {
  std::vector<ParallelUnit> documents;
  ParallelUnit current;
  size_t tokens = 0;
  bool open = false;
  auto close = [&] {
    current.unit_id = absl::StrCat("tb:", documents.size());
    current.dialogue_id = current.unit_id;
    current.granularity = Granularity::kDocument;
    documents.push_back(std::move(current));
    current = ParallelUnit();
    tokens = 0;
    open = false;
  };
  for (const SentencePair& pair : pairs) {
    if (open) {
      current.source += kDocumentLineSeparator;
      current.target += kDocumentLineSeparator;
    }
    current.source += pair.source;
    current.target += pair.target;
    open = true;
    tokens += Tokenize(pair.source).size();
    if (tokens >= static_cast<size_t>(std::max(budget, 1))) close();
  }
  if (open) close();
  return documents;
}

std::vector<std::string> DialogueIds(std::span<const Utterance> utterances) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const Utterance& u : utterances) {
    if (seen.insert(u.dialogue_id).second) ids.push_back(u.dialogue_id);
  }
  return ids;
}

int MaxUtterancesPerDialogue(std::span<const Utterance> utterances) {
  std::map<std::string, int> counts;
  int best = 0;
  for (const Utterance& u : utterances) {
    best = std::max(best, ++counts[u.dialogue_id]);
  }
  return best;
}

absl::StatusOr<CorpusSplit> SplitByDialogue(std::span<const Utterance> utterances,
                                            const SplitSpec& spec) {
  if (!(spec.train > 0 && spec.val > 0 && spec.test > 0) ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        "split fractions must be positive and sum to 1");
  }
  std::vector<std::string> ids = DialogueIds(utterances);
  const size_t n = ids.size();
  const size_t n_train = static_cast<size_t>(std::llround(n * spec.train));
  const size_t n_val = static_cast<size_t>(std::llround(n * spec.val));
  if (n_train < 1 || n_val < 1 || n_train + n_val >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        n, " dialogues are too few for three non-empty splits"));
  }
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(spec.seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  CorpusSplit split;
  split.train_dialogues.assign(ids.begin(), ids.begin() + n_train);
  split.val_dialogues.assign(ids.begin() + n_train,
                             ids.begin() + n_train + n_val);
  split.test_dialogues.assign(ids.begin() + n_train + n_val, ids.end());
  std::sort(split.train_dialogues.begin(), split.train_dialogues.end());
  std::sort(split.val_dialogues.begin(), split.val_dialogues.end());
  std::sort(split.test_dialogues.begin(), split.test_dialogues.end());

  const std::set<std::string> train(split.train_dialogues.begin(),
                                    split.train_dialogues.end());
  const std::set<std::string> val(split.val_dialogues.begin(),
                                  split.val_dialogues.end());
  for (const Utterance& u : utterances) {
    if (train.contains(u.dialogue_id)) {
      split.train.push_back(u);
    } else if (val.contains(u.dialogue_id)) {
      split.val.push_back(u);
    } else {
      split.test.push_back(u);
    }
  }
  return split;
}

}  // namespace dpgran
