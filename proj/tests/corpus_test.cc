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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpgran/fake_pii.h"
#include "dpgran/pii.h"
#include "dpgran/synth.h"
#include "dpgran/vocab.h"
#include "gtest/gtest.h"

namespace dpgran {
namespace {

using Tokens = std::vector<std::string>;

std::vector<Utterance> Dialogue(const std::string& id, int turns) {
  std::vector<Utterance> out;
  for (int t = 0; t < turns; ++t) {
    out.push_back({id, t, t % 2 == 0 ? "Agent" : "Customer",
                   absl::StrCat("Satz ", t, " von ", id),
                   absl::StrCat("Sentence ", t, " of ", id)});
  }
  return out;
}

TEST(TokenizeTest, SplitsWhitespaceAndFreePunctuation) {
  EXPECT_EQ(Tokenize("Agent: Good Morning"), (Tokens{"Agent", ":", "Good", "Morning"}));
  EXPECT_EQ(Tokenize("  Hello,   world!  "), (Tokens{"Hello", ",", "world", "!"}));
  EXPECT_EQ(Tokenize("(yes)"), (Tokens{"(", "yes", ")"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize(" \t\n").empty());
}

TEST(TokenizeTest, KeepsWordInternalPunctuation) {
  EXPECT_EQ(Tokenize("mail a.b@c.de now."), (Tokens{"mail", "a.b@c.de", "now", "."}));
  EXPECT_EQ(Tokenize("e-mail costs 3.50"), (Tokens{"e-mail", "costs", "3.50"}));
  EXPECT_EQ(Tokenize("Grüße, Jürgen"), (Tokens{"Grüße", ",", "Jürgen"}));
}

TEST(VocabularyTest, SpecialIdsAndFirstSeenOrder) {
  Vocabulary vocab = Vocabulary::FromTexts({"b a", "c a"});
  EXPECT_EQ(vocab.size(), kNumSpecialIds + 3);
  EXPECT_EQ(vocab.Id("b"), kNumSpecialIds);
  EXPECT_EQ(vocab.Id("a"), kNumSpecialIds + 1);
  EXPECT_EQ(vocab.Id("zzz"), kUnkId);
  std::set<int> specials = {kPadId, kBosId, kEosId, kUnkId};
  EXPECT_EQ(specials.size(), 4u);
  EXPECT_EQ(vocab.Encode("a b q"), (std::vector<int>{5, 4, kUnkId}));
  EXPECT_EQ(vocab.Decode({5, 4, kEosId, 6}), "a b");
}

TEST(VocabularyTest, TokenListRoundTripAndFingerprint) {
  Vocabulary vocab = Vocabulary::FromTexts({"eins zwei drei"});
  auto copy = Vocabulary::FromTokens(vocab.tokens());
  ASSERT_TRUE(copy.ok());
  EXPECT_EQ(copy->tokens(), vocab.tokens());
  EXPECT_EQ(copy->Fingerprint(), vocab.Fingerprint());
  EXPECT_NE(Vocabulary::FromTexts({"eins zwei vier"}).Fingerprint(),
            vocab.Fingerprint());
  Tokens duplicated = vocab.tokens();
  duplicated.push_back("eins");
  EXPECT_FALSE(Vocabulary::FromTokens(duplicated).ok());
}

TEST(ParseUtterancesJsonlTest, ValidFile) {
  auto parsed = ParseUtterancesJsonl(
      R"({"dialogue_id":"d1","turn":1,"speaker":"Customer","src":"Ja","tgt":"Yes"})"
      "\n"
      R"({"dialogue_id":"d1","turn":0,"speaker":"Agent","src":"Hallo","tgt":"Hello"})"
      "\n");
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  ASSERT_EQ(parsed->size(), 2u);
  EXPECT_EQ((*parsed)[0].turn, 0);
  EXPECT_EQ((*parsed)[0].speaker, "Agent");
  EXPECT_EQ((*parsed)[1].target, "Yes");
}

TEST(ParseUtterancesJsonlTest, MissingSpeakerNamesTheLine) {
  auto parsed = ParseUtterancesJsonl(
      R"({"dialogue_id":"d1","turn":0,"speaker":"Agent","src":"a","tgt":"b"})"
      "\n"
      R"({"dialogue_id":"d1","turn":1,"src":"a","tgt":"b"})"
      "\n");
  ASSERT_FALSE(parsed.ok());
  EXPECT_NE(parsed.status().message().find("line 2"), std::string::npos);
  EXPECT_NE(parsed.status().message().find("speaker"), std::string::npos);
}

TEST(ParseUtterancesJsonlTest, NonDenseTurnsAreRejected) {
  auto parsed = ParseUtterancesJsonl(
      R"({"dialogue_id":"d1","turn":0,"speaker":"A","src":"a","tgt":"b"})"
      "\n"
      R"({"dialogue_id":"d1","turn":2,"speaker":"A","src":"a","tgt":"b"})"
      "\n");
  EXPECT_FALSE(parsed.ok());
}

TEST(ParseUtterancesJsonlTest, MalformedJsonNamesTheLine) {
  auto parsed = ParseUtterancesJsonl("{not json}\n");
  ASSERT_FALSE(parsed.ok());
  EXPECT_NE(parsed.status().message().find("line 1"), std::string::npos);
}

TEST(UtterancesJsonlTest, RoundTrip) {
  std::vector<Utterance> original = Dialogue("x", 3);
  original[1].source = "Zitat \"mit\" Zeilen\numbruch";
  auto parsed = ParseUtterancesJsonl(UtterancesToJsonl(original));
  ASSERT_TRUE(parsed.ok());
  ASSERT_EQ(parsed->size(), 3u);
  EXPECT_EQ((*parsed)[1].source, original[1].source);
}

TEST(ToSentenceUnitsTest, SpeakerPrefixedUnits) {
  std::vector<Utterance> u = {{"d", 0, "Agent", "Guten Morgen", "Good Morning"},
                              {"d", 1, "Cust:omer", "", ""}};
  std::vector<ParallelUnit> units = ToSentenceUnits(u);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].source, "Agent: Guten Morgen");
  EXPECT_EQ(units[0].target, "Agent: Good Morning");
  EXPECT_EQ(units[0].granularity, Granularity::kSentence);
  EXPECT_EQ(units[1].source, "Cust:omer: ");
  EXPECT_EQ(units[1].target, "Cust:omer: ");
}

TEST(ToDocumentUnitsTest, OneUnitPerDialogue) {
  std::vector<Utterance> u = Dialogue("a", 3);
  std::vector<Utterance> single = Dialogue("b", 1);
  u.insert(u.end(), single.begin(), single.end());
  std::vector<ParallelUnit> docs = ToDocumentUnits(u);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(SplitDocumentLines(docs[0].source).size(), 3u);
  EXPECT_EQ(SplitDocumentLines(docs[0].target).size(), 3u);
  EXPECT_EQ(docs[0].granularity, Granularity::kDocument);
  std::vector<ParallelUnit> sentence = ToSentenceUnits(single);
  EXPECT_EQ(docs[1].source, sentence[0].source);
  EXPECT_EQ(docs[1].target, sentence[0].target);
}

TEST(ToDocumentUnitsTest, MaiaShapedFixtureGives355Documents) {
  // 355 dialogues holding 13,380 utterances in total.
  std::vector<Utterance> u;
  int remaining = 13380;
  for (int i = 0; i < 355; ++i) {
    const int turns = remaining / (355 - i);
    remaining -= turns;
    std::vector<Utterance> d = Dialogue(absl::StrCat("maia", i), turns);
    u.insert(u.end(), d.begin(), d.end());
  }
  ASSERT_EQ(u.size(), 13380u);
  EXPECT_EQ(ToDocumentUnits(u).size(), 355u);
  EXPECT_EQ(ToSentenceUnits(u).size(), 13380u);
}

TEST(ToDocumentUnitsTest, NewlineSplitReproducesSentenceUnits) {
  SynthOptions options;
  options.n_dialogues = 60;
  options.seed = 4;
  auto corpus = SynthesizeCorpus(options);
  ASSERT_TRUE(corpus.ok());
  std::vector<ParallelUnit> sentences = ToSentenceUnits(corpus->utterances);
  std::vector<ParallelUnit> docs = ToDocumentUnits(corpus->utterances);
  EXPECT_EQ(docs.size(), DialogueIds(corpus->utterances).size());
  size_t next = 0;
  for (const ParallelUnit& doc : docs) {
    Tokens src = SplitDocumentLines(doc.source);
    Tokens tgt = SplitDocumentLines(doc.target);
    ASSERT_EQ(src.size(), tgt.size());
    for (size_t i = 0; i < src.size(); ++i, ++next) {
      ASSERT_LT(next, sentences.size());
      EXPECT_EQ(src[i], sentences[next].source);
      EXPECT_EQ(tgt[i], sentences[next].target);
      EXPECT_EQ(doc.dialogue_id, sentences[next].dialogue_id);
    }
  }
  EXPECT_EQ(next, sentences.size());
}

TEST(UnitsJsonlTest, RoundTrip) {
  std::vector<ParallelUnit> units = ToDocumentUnits(Dialogue("q", 2));
  std::vector<ParallelUnit> sentences = ToSentenceUnits(Dialogue("q", 2));
  units.insert(units.end(), sentences.begin(), sentences.end());
  auto parsed = ParseUnitsJsonl(UnitsToJsonl(units));
  ASSERT_TRUE(parsed.ok());
  ASSERT_EQ(parsed->size(), units.size());
  for (size_t i = 0; i < units.size(); ++i) {
    EXPECT_EQ((*parsed)[i].unit_id, units[i].unit_id);
    EXPECT_EQ((*parsed)[i].granularity, units[i].granularity);
    EXPECT_EQ((*parsed)[i].source, units[i].source);
    EXPECT_EQ((*parsed)[i].target, units[i].target);
    EXPECT_EQ((*parsed)[i].turn, units[i].turn);
  }
}

TEST(BuildTokenBudgetDocumentsTest, LargeBudgetGivesOneDocument) {
  std::vector<SentencePair> pairs = {{"a b", "x"}, {"c", "y"}, {"d e f", "z"}};
  std::vector<ParallelUnit> docs = BuildTokenBudgetDocuments(pairs, 1000);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].source, "a b\nc\nd e f");
  EXPECT_EQ(docs[0].target, "x\ny\nz");
}

TEST(BuildTokenBudgetDocumentsTest, FullSentencesGetTheirOwnDocument) {
  std::vector<SentencePair> pairs = {{"a b c", "1"}, {"d e f", "2"}, {"g h i", "3"}};
  std::vector<ParallelUnit> docs = BuildTokenBudgetDocuments(pairs, 3);
  ASSERT_EQ(docs.size(), 3u);
  for (size_t i = 0; i < 3; ++i) EXPECT_EQ(docs[i].source, pairs[i].source);
}

TEST(BuildTokenBudgetDocumentsTest, PreservesOrderAndContent) {
  std::mt19937_64 rng(50);
  std::uniform_int_distribution<int> len(1, 12);
  std::vector<SentencePair> pairs;
  for (int i = 0; i < 50; ++i) {
    SentencePair p;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) absl::StrAppend(&p.source, k ? " " : "", "w", i, "_", k);
    p.target = absl::StrCat("t", i);
    pairs.push_back(p);
  }
  std::vector<ParallelUnit> docs = BuildTokenBudgetDocuments(pairs, 20);
  Tokens flat_src;
  Tokens flat_tgt;
  for (const ParallelUnit& d : docs) {
    for (std::string& line : SplitDocumentLines(d.source)) flat_src.push_back(line);
    for (std::string& line : SplitDocumentLines(d.target)) flat_tgt.push_back(line);
  }
  ASSERT_EQ(flat_src.size(), pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(flat_src[i], pairs[i].source);
    EXPECT_EQ(flat_tgt[i], pairs[i].target);
  }
  EXPECT_EQ(BuildTokenBudgetDocuments(pairs, kDeEnTokenBudget).size(), 1u);
  EXPECT_EQ(kJaEnTokenBudget, 1200);
  EXPECT_EQ(kDeEnTokenBudget, 1600);
}

TEST(SplitByDialogueTest, EightOneOne) {
  std::vector<Utterance> u;
  for (int i = 0; i < 10; ++i) {
    std::vector<Utterance> d = Dialogue(absl::StrCat("d", i), 2 + i % 3);
    u.insert(u.end(), d.begin(), d.end());
  }
  auto split = SplitByDialogue(u, {0.8, 0.1, 0.1, 3});
  ASSERT_TRUE(split.ok());
  EXPECT_EQ(split->train_dialogues.size(), 8u);
  EXPECT_EQ(split->val_dialogues.size(), 1u);
  EXPECT_EQ(split->test_dialogues.size(), 1u);
  EXPECT_EQ(split->train.size() + split->val.size() + split->test.size(), u.size());

  std::set<std::string> train(split->train_dialogues.begin(),
                              split->train_dialogues.end());
  for (const Utterance& x : split->val) EXPECT_FALSE(train.contains(x.dialogue_id));
  for (const Utterance& x : split->test) EXPECT_FALSE(train.contains(x.dialogue_id));

  auto again = SplitByDialogue(u, {0.8, 0.1, 0.1, 3});
  EXPECT_EQ(again->train_dialogues, split->train_dialogues);
  EXPECT_EQ(again->test_dialogues, split->test_dialogues);
}

TEST(SplitByDialogueTest, TooFewDialogues) {
  std::vector<Utterance> u = Dialogue("only", 4);
  EXPECT_FALSE(SplitByDialogue(u, {0.8, 0.1, 0.1, 0}).ok());
  std::vector<Utterance> two = Dialogue("second", 2);
  u.insert(u.end(), two.begin(), two.end());
  EXPECT_FALSE(SplitByDialogue(u, {0.8, 0.1, 0.1, 0}).ok());
}

TEST(SplitByDialogueTest, RejectsBadFractions) {
  std::vector<Utterance> u;
  for (int i = 0; i < 10; ++i) {
    std::vector<Utterance> d = Dialogue(absl::StrCat("d", i), 2);
    u.insert(u.end(), d.begin(), d.end());
  }
  EXPECT_FALSE(SplitByDialogue(u, {0.8, 0.0, 0.2, 0}).ok());
  EXPECT_FALSE(SplitByDialogue(u, {-0.1, 0.5, 0.6, 0}).ok());
}

TEST(MaxUtterancesPerDialogueTest, Longest) {
  std::vector<Utterance> u = Dialogue("a", 3);
  std::vector<Utterance> b = Dialogue("b", 7);
  u.insert(u.end(), b.begin(), b.end());
  EXPECT_EQ(MaxUtterancesPerDialogue(u), 7);
  EXPECT_EQ(DialogueIds(u), (Tokens{"a", "b"}));
}

TEST(ReplacePiiTest, OneNamePerDialogue) {
  std::vector<Utterance> u = {
      {"d1", 0, "Agent", "Hallo #NAME#", "Hello #NAME#"},
      {"d1", 1, "Customer", "Ich bin #NAME#", "I am #NAME#"},
      {"d2", 0, "Agent", "Hallo #NAME#", "Hello #NAME#"},
  };
  auto replaced = ReplacePii(u, "de", 11);
  ASSERT_TRUE(replaced.ok());
  const std::string name1 = replaced->utterances[0].target.substr(6);
  EXPECT_EQ(replaced->utterances[1].target, "I am " + name1);
  EXPECT_EQ(replaced->utterances[1].source, "Ich bin " + name1);
  const std::string name2 = replaced->utterances[2].target.substr(6);
  if (name1 == name2) {
    EXPECT_FALSE(replaced->collisions.empty());
  } else {
    EXPECT_NE(name1, name2);
  }
  for (const PiiLedgerEntry& e : replaced->ledger) {
    const Utterance* owner = nullptr;
    for (const Utterance& x : replaced->utterances) {
      if (x.dialogue_id == e.dialogue_id && x.turn == e.turn) owner = &x;
    }
    ASSERT_NE(owner, nullptr);
    EXPECT_EQ(owner->target.substr(e.char_start, e.char_end - e.char_start),
              e.value);
  }
}

TEST(ReplacePiiTest, GermanOrganizationAndIdempotence) {
  std::vector<Utterance> u = {{"d1", 0, "Agent", "Firma #PRS_ORG#", "Company #PRS_ORG#"}};
  auto replaced = ReplacePii(u, "de", 3);
  ASSERT_TRUE(replaced.ok());
  ASSERT_EQ(replaced->ledger.size(), 1u);
  EXPECT_EQ(replaced->ledger[0].category, PiiCategory::kOrg);
  const std::string& org = replaced->ledger[0].value;
  EXPECT_TRUE(org.find("GmbH") != std::string::npos ||
              org.find("AG") != std::string::npos ||
              org.find("KG") != std::string::npos)
      << org;

  auto again = ReplacePii(replaced->utterances, "de", 3);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->utterances[0].source, replaced->utterances[0].source);
  EXPECT_EQ(again->utterances[0].target, replaced->utterances[0].target);
  EXPECT_TRUE(again->ledger.empty());
}

TEST(ReplacePiiTest, UnknownPlaceholderIsAnError) {
  std::vector<Utterance> u = {{"d1", 0, "Agent", "#SECRET#", "#SECRET#"}};
  EXPECT_FALSE(ReplacePii(u, "de", 0).ok());
  std::vector<Utterance> ok = {{"d1", 0, "Agent", "#NAME#", "#NAME#"}};
  EXPECT_FALSE(ReplacePii(ok, "xx", 0).ok());
}

TEST(SynthesizeCorpusTest, Deterministic) {
  SynthOptions options;
  options.n_dialogues = 10;
  options.seed = 9;
  auto a = SynthesizeCorpus(options);
  auto b = SynthesizeCorpus(options);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(UtterancesToJsonl(a->utterances), UtterancesToJsonl(b->utterances));
  EXPECT_EQ(LedgerToJsonl(a->ledger), LedgerToJsonl(b->ledger));
  EXPECT_EQ(DialogueIds(a->utterances).size(), 10u);
}

TEST(SynthesizeCorpusTest, ZeroDensityHasEmptyLedger) {
  SynthOptions options;
  options.n_dialogues = 20;
  options.pii_density = 0.0;
  auto corpus = SynthesizeCorpus(options);
  ASSERT_TRUE(corpus.ok());
  EXPECT_TRUE(corpus->ledger.empty());
}

TEST(SynthesizeCorpusTest, NamesRecurAcrossTurns) {
  SynthOptions options;
  options.n_dialogues = 40;
  options.seed = 21;
  auto corpus = SynthesizeCorpus(options);
  ASSERT_TRUE(corpus.ok());
  std::map<std::string, std::string> names;
  for (const PiiLedgerEntry& e : corpus->ledger) {
    if (e.category == PiiCategory::kPerson) names[e.dialogue_id] = e.value;
  }
  EXPECT_EQ(names.size(), 40u);
  for (const auto& [dialogue, name] : names) {
    std::set<int> turns;
    for (const Utterance& u : corpus->utterances) {
      if (u.dialogue_id == dialogue && u.target.find(name) != std::string::npos) {
        turns.insert(u.turn);
      }
    }
    EXPECT_GE(turns.size(), 2u) << dialogue << " " << name;
  }
}

TEST(SynthesizeCorpusTest, TurnCountsAndDenseTurns) {
  SynthOptions options;
  options.n_dialogues = 30;
  options.turns_min = 3;
  options.turns_max = 5;
  auto corpus = SynthesizeCorpus(options);
  ASSERT_TRUE(corpus.ok());
  std::map<std::string, int> counts;
  for (const Utterance& u : corpus->utterances) {
    EXPECT_EQ(u.turn, counts[u.dialogue_id]++);
  }
  for (const auto& [id, n] : counts) {
    EXPECT_GE(n, 3);
    EXPECT_LE(n, 5);
  }
}

}  // namespace
}  // namespace dpgran
