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

#ifndef DPGRAN_CHECKPOINT_H_
#define DPGRAN_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "dpgran/seq2seq.h"
#include "dpgran/vocab.h"

namespace dpgran {

// A model together with the fingerprints of the vocabularies it was built on.
struct Checkpoint {
  TinySeq2Seq model = TinySeq2Seq::Zero({4, 4, 1});
  uint64_t source_fingerprint = 0;
  uint64_t target_fingerprint = 0;
};

// One JSON header line followed by the parameters as little-endian float64.
std::string SerializeCheckpoint(const Checkpoint& checkpoint);
absl::StatusOr<Checkpoint> DeserializeCheckpoint(std::string_view bytes);

absl::Status SaveCheckpoint(const std::string& path,
                            const Checkpoint& checkpoint);
absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path);

// Fails unless the checkpoint was trained on exactly these vocabularies.
absl::Status CheckVocabulary(const Checkpoint& checkpoint,
                             const VocabPair& vocab);

}  // namespace dpgran

#endif  // DPGRAN_CHECKPOINT_H_
