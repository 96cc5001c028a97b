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

#ifndef DPGRAN_CONFIG_H_
#define DPGRAN_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/corpus.h"
#include "dpgran/synth.h"

namespace dpgran {

// A flat view of a TOML-style document: "section.key" -> raw value text.
// Supports [section] headers, key = value lines, # comments, strings,
// numbers, booleans and single-line arrays.
class KeyValueFile {
 public:
  static absl::StatusOr<KeyValueFile> Parse(std::string_view text);

  bool Has(const std::string& key) const { return values_.contains(key); }
  std::vector<std::string> Keys() const;

  absl::StatusOr<std::string> GetString(const std::string& key) const;
  // Accepts "inf" (quoted or bare) as positive infinity.
  absl::StatusOr<double> GetDouble(const std::string& key) const;
  absl::StatusOr<int64_t> GetInt(const std::string& key) const;
  absl::StatusOr<bool> GetBool(const std::string& key) const;
  absl::StatusOr<std::vector<double>> GetDoubleList(const std::string& key) const;
  absl::StatusOr<std::vector<int64_t>> GetIntList(const std::string& key) const;
  absl::StatusOr<std::vector<std::string>> GetStringList(
      const std::string& key) const;

 private:
  struct Entry {
    std::string raw;
    int line = 0;
  };
  absl::StatusOr<Entry> Find(const std::string& key) const;

  std::map<std::string, Entry> values_;
};

enum class ModelTag { kSen, kDoc, kAugdoc, kAugdocZeroShot };

// "sen", "doc", "augdoc", "augdoc_zero_shot".
std::string_view ModelTagName(ModelTag tag);
// Also accepts "augdoc-zero-shot".
absl::StatusOr<ModelTag> ParseModelTag(std::string_view name);

// Optimizer settings for one training configuration.
struct TrainSpec {
  double learning_rate = 0.5;
  int64_t lot_size = 16;
  double epochs = 10.0;
  // Only used by private runs; non-private runs never clip.
  double clip_bound = 1.0;
  int64_t accumulation_chunk = 64;
  int num_threads = 1;
};

struct ExperimentConfig {
  // [experiment]
  std::string output_dir = "out";
  std::vector<uint64_t> seeds = {0, 1, 2};
  double delta = 1e-8;
  // With `epsilon_ladder` the epsilons are derived from the corpus; see
  // EpsilonLadder. Otherwise `epsilons` is used as given.
  bool epsilon_ladder = true;
  double epsilon_base = 1.0;
  std::vector<double> epsilons;
  std::vector<ModelTag> tags = {ModelTag::kSen, ModelTag::kDoc};

  // [corpus]
  bool synthetic = true;
  SynthOptions synth;
  std::string corpus_path;
  std::string ledger_path;
  SplitSpec split;
  uint64_t member_seed = 0;

  // [public_corpus]
  int public_dialogues = 50;
  int public_token_budget = kDeEnTokenBudget;
  uint64_t public_seed = 1;

  // [model]
  int dim = 16;
  int max_decode_len = 48;
  bool bleu_smoothing = true;

  // [train.sen], [train.sen_dp], [train.doc], [train.doc_dp], [train.public]
  TrainSpec sen;
  TrainSpec sen_dp;
  TrainSpec doc;
  TrainSpec doc_dp;
  TrainSpec public_pretrain;
};

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view text);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// {inf, base * m * 10, base * m, 10, 1} for a corpus whose longest dialogue
// has m utterances, with repeated values dropped.
std::vector<double> EpsilonLadder(double base, int max_utterances);

// Sentence settings for sen, document settings for doc and augdoc, and the
// public settings for augdoc_zero_shot.
const TrainSpec& TrainSpecFor(const ExperimentConfig& config, ModelTag tag,
                              bool is_private);

}  // namespace dpgran

#endif  // DPGRAN_CONFIG_H_
