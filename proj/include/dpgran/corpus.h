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

#ifndef DPGRAN_CORPUS_H_
#define DPGRAN_CORPUS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace dpgran {

// One turn of a dialogue with its translation.
struct Utterance {
  std::string dialogue_id;
  int turn = 0;
  std::string speaker;
  std::string source;
  std::string target;
};

enum class Granularity { kSentence, kDocument };

std::string_view GranularityName(Granularity granularity);
absl::StatusOr<Granularity> ParseGranularity(std::string_view name);

// A training unit. Sentence units carry the turn and speaker of their
// utterance; document units carry turn 0 and an empty speaker.
struct ParallelUnit {
  std::string unit_id;
  Granularity granularity = Granularity::kSentence;
  std::string dialogue_id;
  int turn = 0;
  std::string speaker;
  std::string source;
  std::string target;
};

// Parses one {"dialogue_id","turn","speaker","src","tgt"} object per line,
// validates it, and sorts by (dialogue_id, turn). Turn indices must be dense
// from 0 within each dialogue. Errors name the offending line.
absl::StatusOr<std::vector<Utterance>> ParseUtterancesJsonl(
    std::string_view contents);
absl::StatusOr<std::vector<Utterance>> LoadUtterancesJsonl(
    const std::string& path);
std::string UtterancesToJsonl(std::span<const Utterance> utterances);

std::string UnitsToJsonl(std::span<const ParallelUnit> units);
absl::StatusOr<std::vector<ParallelUnit>> ParseUnitsJsonl(
    std::string_view contents);

// "<SPEAKER>: <UTTERANCE>" on both sides, one unit per utterance.
std::vector<ParallelUnit> ToSentenceUnits(std::span<const Utterance> utterances);

// One unit per dialogue: the speaker-prefixed lines joined by '\n'.
std::vector<ParallelUnit> ToDocumentUnits(std::span<const Utterance> utterances);

inline constexpr char kDocumentLineSeparator = '\n';

std::vector<std::string> SplitDocumentLines(std::string_view document);

struct SentencePair {
  std::string source;
  std::string target;
};

// Named budgets (source tokens) for token-budget documents.
inline constexpr int kJaEnTokenBudget = 1200;
inline constexpr int kDeEnTokenBudget = 1600;

// Greedily concatenates consecutive pairs into documents. A document closes
// right after the pair that brings its source token count to `budget` or
// beyond; the final document may be shorter.
std::vector<ParallelUnit> BuildTokenBudgetDocuments(
    std::span<const SentencePair> pairs, int budget);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  uint64_t seed = 0;
};

struct CorpusSplit {
  std::vector<std::string> train_dialogues;
  std::vector<std::string> val_dialogues;
  std::vector<std::string> test_dialogues;
  std::vector<Utterance> train;
  std::vector<Utterance> val;
  std::vector<Utterance> test;
};

// Partitions whole dialogues into train/val/test. Deterministic under
// spec.seed. Dialogue id lists are sorted.
absl::StatusOr<CorpusSplit> SplitByDialogue(std::span<const Utterance> utterances,
                                            const SplitSpec& spec);

// Dialogue ids in order of first appearance.
std::vector<std::string> DialogueIds(std::span<const Utterance> utterances);

int MaxUtterancesPerDialogue(std::span<const Utterance> utterances);

}  // namespace dpgran

#endif  // DPGRAN_CORPUS_H_
