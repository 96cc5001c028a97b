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

#ifndef DPGRAN_FAKE_PII_H_
#define DPGRAN_FAKE_PII_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/corpus.h"
#include "dpgran/pii.h"

namespace dpgran {

// The fake entities that stand in for one dialogue's anonymized PII.
struct FakeIdentity {
  std::string name;
  std::string org;
  std::string email;
  std::string url;
  std::string phone;
  std::string order;
};

// Supported locales: "en", "de".
absl::StatusOr<FakeIdentity> GenerateFakeIdentity(std::string_view locale,
                                                  std::mt19937_64& rng);

struct PiiReplacement {
  std::vector<Utterance> utterances;
  std::vector<PiiLedgerEntry> ledger;
  // Values that ended up shared by more than one dialogue.
  std::vector<std::string> collisions;
};

// Replaces #NAME#, #PRS_ORG#, #EMAIL#, #URL#, #PHONE# and #ORDER# on both
// sides with one fake value per (dialogue, placeholder type). Values depend
// only on (seed, dialogue id), never on corpus order. The ledger records the
// target-side spans. Any other #UPPER_CASE# token is an error.
absl::StatusOr<PiiReplacement> ReplacePii(std::span<const Utterance> utterances,
                                          std::string_view locale,
                                          uint64_t seed);

}  // namespace dpgran

#endif  // DPGRAN_FAKE_PII_H_
