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

#ifndef DPGRAN_SYNTH_H_
#define DPGRAN_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/corpus.h"
#include "dpgran/pii.h"

namespace dpgran {

struct SynthOptions {
  int n_dialogues = 10;
  // Inclusive turn-count range; values below 2 are raised to 2.
  int turns_min = 6;
  int turns_max = 12;
  // Probability that a mid-dialogue exchange carries PII. At 0 the corpus
  // carries no PII at all.
  double pii_density = 0.8;
  uint64_t seed = 0;
  std::string locale = "de";
  std::string id_prefix = "dlg";
};

struct SyntheticCorpus {
  std::vector<Utterance> utterances;
  std::vector<PiiLedgerEntry> ledger;
};

// Template-generated German -> English customer-support dialogues. When
// pii_density > 0 every dialogue greets and dismisses the customer by name,
// and each PII exchange mentions its entity in both of its turns, so every
// planted entity recurs in at least two turns of its dialogue.
absl::StatusOr<SyntheticCorpus> SynthesizeCorpus(const SynthOptions& options);

}  // namespace dpgran

#endif  // DPGRAN_SYNTH_H_
