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

#include "dpgran/vocab.h"

#include <cctype>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpgran {
namespace {

constexpr const char* kSpecialTokens[kNumSpecialIds] = {"<pad>", "<bos>",
                                                        "<eos>", "<unk>"};

bool IsAsciiSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsAsciiPunct(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  auto is_word = [&](size_t i) {
    if (i >= text.size()) return false;
    const unsigned char c = static_cast<unsigned char>(text[i]);
    return !IsAsciiSpace(c) && !IsAsciiPunct(c);
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (IsAsciiSpace(c)) {
      flush();
    } else if (IsAsciiPunct(c) &&
               !(i > 0 && is_word(i - 1) && is_word(i + 1))) {
      flush();
      tokens.emplace_back(1, text[i]);
    } else {
      current += text[i];
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  for (const char* token : kSpecialTokens) Add(token);
}

Vocabulary Vocabulary::FromTexts(const std::vector<std::string>& texts) {
  Vocabulary vocab;
  for (const std::string& text : texts) {
    for (const std::string& token : Tokenize(text)) vocab.Add(token);
  }
  return vocab;
}

absl::StatusOr<Vocabulary> Vocabulary::FromTokens(
    std::vector<std::string> tokens) {
  if (tokens.size() < kNumSpecialIds) {
    return absl::InvalidArgumentError("vocabulary lacks the special tokens");
  }
  for (int i = 0; i < kNumSpecialIds; ++i) {
    if (tokens[i] != kSpecialTokens[i]) {
      return absl::InvalidArgumentError(
          absl::StrCat("id ", i, " must be ", kSpecialTokens[i]));
    }
  }
  Vocabulary vocab;
  for (size_t i = kNumSpecialIds; i < tokens.size(); ++i) {
    if (vocab.Contains(tokens[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate vocabulary token '", tokens[i], "'"));
    }
    vocab.Add(tokens[i]);
  }
  return vocab;
}

int Vocabulary::Add(std::string_view token) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(token), static_cast<int>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::Contains(std::string_view token) const {
  return ids_.contains(std::string(token));
}

std::vector<int> Vocabulary::Encode(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& token : Tokenize(text)) ids.push_back(Id(token));
  return ids;
}

std::string Vocabulary::Decode(const std::vector<int>& ids) const {
  std::string text;
  for (int id : ids) {
    if (id == kEosId) break;
    if (id < kNumSpecialIds) continue;
    if (!text.empty()) text += ' ';
    text += Token(id);
  }
  return text;
}

uint64_t Vocabulary::Fingerprint() const {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (const std::string& token : tokens_) {
    for (unsigned char c : token) {
      hash ^= c;
      hash *= 0x100000001b3ull;
    }
    hash ^= 0xff;  // token separator
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace dpgran
