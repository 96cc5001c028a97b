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

#ifndef DPGRAN_VOCAB_H_
#define DPGRAN_VOCAB_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace dpgran {

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumSpecialIds = 4;

// Splits on whitespace and emits ASCII punctuation as single-character
// tokens, except punctuation with word characters on both sides, which stays
// inside its word ("e-mail", "a.b@c.de", "3.50"). Case is preserved. Bytes
// >= 0x80 count as word characters, so UTF-8 sequences stay inside their word.
std::vector<std::string> Tokenize(std::string_view text);

// Token <-> id map with ids dense from 0. Ids 0..3 are <pad>, <bos>, <eos>,
// <unk>.
class Vocabulary {
 public:
  Vocabulary();

  // Adds tokens in first-seen order.
  static Vocabulary FromTexts(const std::vector<std::string>& texts);
  static absl::StatusOr<Vocabulary> FromTokens(std::vector<std::string> tokens);

  int Add(std::string_view token);
  // Unknown tokens map to kUnkId.
  int Id(std::string_view token) const;
  bool Contains(std::string_view token) const;
  const std::string& Token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> Encode(std::string_view text) const;
  std::string Decode(const std::vector<int>& ids) const;

  // FNV-1a over the ordered token list; identifies the vocabulary in
  // checkpoint headers.
  uint64_t Fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct VocabPair {
  Vocabulary source;
  Vocabulary target;
};

}  // namespace dpgran

#endif  // DPGRAN_VOCAB_H_
