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

#include "dpgran/fake_pii.h"

#include <array>
#include <cctype>
#include <map>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"

namespace dpgran {
namespace {

struct LocaleData {
  std::vector<std::string_view> first_names;
  std::vector<std::string_view> surname_heads;
  std::vector<std::string_view> surname_tails;
  std::vector<std::string_view> org_heads;
  std::vector<std::string_view> org_tails;
  std::vector<std::string_view> org_suffixes;
  std::string_view tld;
  std::string_view phone_prefix;
  std::vector<std::string_view> area_codes;
};

const LocaleData& GermanData() {
  static const LocaleData* data = new LocaleData{
      {"Immo", "Jutta", "Heinz", "Gudrun", "Wolfgang", "Ilse", "Detlef",
       "Renate", "Klaus", "Hannelore", "Dieter", "Ursula", "Volker", "Brigitte",
       "Horst", "Sabine", "Jens", "Anke", "Uwe", "Petra", "Torsten", "Heike",
       "Lothar", "Edeltraud", "Rainer", "Marlies", "Gerd", "Birgit", "Holger",
       "Silke", "Bernd", "Dagmar"},
      {"Hande", "Horn", "Brand", "Eber", "Fried", "Gold", "Hart", "Kessel",
       "Lind", "Mahl", "Neu", "Ober", "Quer", "Ross", "Stein", "Tann", "Wald",
       "Zell", "Bau", "Dorn"},
      {"hardt", "mann", "berger", "hofer", "ig", "stedt", "wald", "bach",
       "ling", "meier", "huber", "schmidt", "feld", "kamp", "rath", "ner"},
      {"Suesse", "Blau", "Fern", "Grün", "Hoch", "Kraft", "Licht", "Nord",
       "Rhein", "Sonnen", "Stadt", "Weiss"},
      {"bier", "werk", "haus", "kontor", "technik", "handel", "bau", "logistik"},
      {"GmbH", "AG", "KG", "GmbH & Co. KG"},
      "de",
      "+49",
      {"30", "40", "69", "89", "221", "711"}};
  return *data;
}

const LocaleData& EnglishData() {
  static const LocaleData* data = new LocaleData{
      {"Alice", "Brian", "Chloe", "Derek", "Emma", "Frank", "Grace", "Harold",
       "Irene", "Jason", "Karen", "Louis", "Megan", "Nathan", "Olivia", "Peter",
       "Quinn", "Rachel", "Simon", "Tracy", "Victor", "Wendy", "Xavier",
       "Yvonne"},
      {"Ash", "Black", "Brook", "Cald", "Dun", "Fair", "Green", "Hal", "Kings",
       "Mar", "North", "Red", "Stan", "Thorn", "West", "Whit"},
      {"ford", "wood", "ley", "ton", "field", "more", "well", "ridge", "worth",
       "by", "combe", "ham"},
      {"Acme", "Bright", "Cedar", "Delta", "Echo", "Falcon", "Harbor", "Iron",
       "Maple", "Summit", "Vertex", "Willow"},
      {"soft", "works", "labs", "line", "point", "craft", "net", "ware"},
      {"Inc.", "Ltd", "LLC", "Group"},
      "com",
      "+1",
      {"212", "312", "415", "617", "718", "917"}};
  return *data;
}

absl::StatusOr<const LocaleData*> LocaleFor(std::string_view locale) {
  if (locale == "de") return &GermanData();
  if (locale == "en") return &EnglishData();
  return absl::InvalidArgumentError(
      absl::StrCat("unsupported locale \"", std::string(locale), "\" (expected en or de)"));
}

std::string Pick(const std::vector<std::string_view>& options,
                      std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> index(0, options.size() - 1);
  return std::string(options[index(rng)]);
}

std::string Digits(int count, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(0, 9);
  std::string out;
  for (int i = 0; i < count; ++i) out += static_cast<char>('0' + digit(rng));
  return out;
}

// Folds the few non-ASCII letters used in the locale tables.
std::string AsciiLower(std::string_view text) {
  std::string out;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text.substr(i, 2) == "\xc3\xbc") {  // u-umlaut
      out += "ue";
      ++i;
    } else {
      out += absl::ascii_tolower(static_cast<unsigned char>(text[i]));
    }
  }
  return out;
}

std::mt19937_64 DialogueRng(uint64_t seed, std::string_view dialogue_id) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : dialogue_id) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(hash), static_cast<uint32_t>(hash >> 32)};
  return std::mt19937_64(seq);
}

struct Placeholder {
  std::string_view token;
  PiiCategory category;
  std::string FakeIdentity::*field;
};

constexpr std::array<Placeholder, 6> kPlaceholders = {{
    {"#NAME#", PiiCategory::kPerson, &FakeIdentity::name},
    {"#PRS_ORG#", PiiCategory::kOrg, &FakeIdentity::org},
    {"#EMAIL#", PiiCategory::kEmail, &FakeIdentity::email},
    {"#URL#", PiiCategory::kUrl, &FakeIdentity::url},
    {"#PHONE#", PiiCategory::kPhone, &FakeIdentity::phone},
    {"#ORDER#", PiiCategory::kOrderNumber, &FakeIdentity::order},
}};

// Length of a #UPPER_CASE# placeholder starting at `pos`, or 0.
size_t PlaceholderLength(std::string_view text, size_t pos) {
  if (text[pos] != '#') return 0;
  size_t end = pos + 1;
  while (end < text.size() &&
         (std::isupper(static_cast<unsigned char>(text[end])) ||
          text[end] == '_')) {
    ++end;
  }
  if (end == pos + 1 || end >= text.size() || text[end] != '#') return 0;
  return end + 1 - pos;
}

struct Substitution {
  std::string text;
  // (placeholder index, start, end) of each inserted value.
  std::vector<std::array<size_t, 3>> inserted;
};

absl::StatusOr<Substitution> Substitute(std::string_view text,
                                        const FakeIdentity& identity) {
  Substitution out;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t length = PlaceholderLength(text, pos);
    if (length == 0) {
      out.text += text[pos++];
      continue;
    }
    const std::string_view token = text.substr(pos, length);
    size_t which = kPlaceholders.size();
    for (size_t i = 0; i < kPlaceholders.size(); ++i) {
      if (kPlaceholders[i].token == token) which = i;
    }
    if (which == kPlaceholders.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown placeholder ", std::string(token)));
    }
    const std::string& value = identity.*kPlaceholders[which].field;
    const size_t start = out.text.size();
    out.text += value;
    out.inserted.push_back({which, start, out.text.size()});
    pos += length;
  }
  return out;
}

}  // namespace

absl::StatusOr<FakeIdentity> GenerateFakeIdentity(std::string_view locale,
                                                  std::mt19937_64& rng) {
  absl::StatusOr<const LocaleData*> data_or = LocaleFor(locale);
  if (!data_or.ok()) return data_or.status();
  const LocaleData& data = **data_or;

  FakeIdentity id;
  const std::string first(Pick(data.first_names, rng));
  std::string surname = absl::StrCat(Pick(data.surname_heads, rng),
                                     Pick(data.surname_tails, rng));
  std::bernoulli_distribution double_barrel(0.3);
  if (double_barrel(rng)) {
    absl::StrAppend(&surname, "-", Pick(data.surname_heads, rng),
                    Pick(data.surname_tails, rng));
  }
  id.name = absl::StrCat(first, " ", surname);

  const std::string stem =
      absl::StrCat(Pick(data.org_heads, rng), Pick(data.org_tails, rng));
  id.org = absl::StrCat(stem, " ", Pick(data.org_suffixes, rng));
  const std::string domain =
      absl::StrCat(AsciiLower(stem), ".", std::string(data.tld));
  id.email =
      absl::StrCat(AsciiLower(first), ".", AsciiLower(surname), "@", domain);
  id.url = absl::StrCat("www.", domain);
  id.phone = absl::StrCat(std::string(data.phone_prefix), " ", Pick(data.area_codes, rng),
                          " ", Digits(7, rng));
  static constexpr std::array<std::string_view, 4> kOrderPrefixes = {
      "160", "161", "172", "184"};
  std::uniform_int_distribution<size_t> prefix(0, kOrderPrefixes.size() - 1);
  id.order = absl::StrCat(std::string(kOrderPrefixes[prefix(rng)]), Digits(6, rng));
  return id;
}

absl::StatusOr<PiiReplacement> ReplacePii(std::span<const Utterance> utterances,
                                          std::string_view locale,
                                          uint64_t seed) {
  if (absl::StatusOr<const LocaleData*> data = LocaleFor(locale); !data.ok()) {
    return data.status();
  }
  PiiReplacement result;
  std::map<std::string, FakeIdentity> identities;
  // value -> dialogues it was inserted into
  std::map<std::string, std::set<std::string>> owners;

  for (const Utterance& u : utterances) {
    auto it = identities.find(u.dialogue_id);
    if (it == identities.end()) {
      std::mt19937_64 rng = DialogueRng(seed, u.dialogue_id);
      absl::StatusOr<FakeIdentity> identity = GenerateFakeIdentity(locale, rng);
      if (!identity.ok()) return identity.status();
      it = identities.emplace(u.dialogue_id, *std::move(identity)).first;
    }
    absl::StatusOr<Substitution> src = Substitute(u.source, it->second);
    absl::StatusOr<Substitution> tgt = Substitute(u.target, it->second);
    for (const absl::StatusOr<Substitution>* side : {&src, &tgt}) {
      if (!side->ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("dialogue ", u.dialogue_id, " turn ", u.turn, ": ",
                         side->status().message()));
      }
    }
    Utterance replaced = u;
    replaced.source = std::move(src->text);
    replaced.target = std::move(tgt->text);
    for (const auto& [which, start, end] : tgt->inserted) {
      PiiLedgerEntry entry;
      entry.dialogue_id = u.dialogue_id;
      entry.category = kPlaceholders[which].category;
      entry.value = replaced.target.substr(start, end - start);
      entry.turn = u.turn;
      entry.char_start = start;
      entry.char_end = end;
      owners[entry.value].insert(u.dialogue_id);
      result.ledger.push_back(std::move(entry));
    }
    result.utterances.push_back(std::move(replaced));
  }
  for (const auto& [value, dialogues] : owners) {
    if (dialogues.size() > 1) result.collisions.push_back(value);
  }
  return result;
}

}  // namespace dpgran
