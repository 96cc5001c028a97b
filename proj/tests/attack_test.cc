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

#include "dpgran/attack.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpgran/corpus.h"
#include "dpgran/dpsgd.h"
#include "dpgran/seq2seq.h"
#include "dpgran/vocab.h"
#include "gtest/gtest.h"

namespace dpgran {
namespace {

std::vector<ParallelUnit> Units(const std::string& prefix, int n) {
  std::vector<ParallelUnit> units(n);
  for (int i = 0; i < n; ++i) {
    units[i].unit_id = absl::StrCat(prefix, i);
    units[i].source = absl::StrCat("quelle ", prefix, " ", i);
    units[i].target = absl::StrCat("target ", prefix, " ", i);
  }
  return units;
}

TEST(ComputeTauTest, MeanOfTrainingLosses) {
  std::vector<double> losses = {0.2, 0.4};
  auto tau = ComputeTau(losses, "fixture");
  ASSERT_TRUE(tau.ok());
  EXPECT_DOUBLE_EQ(tau->tau, 0.3);
  EXPECT_EQ(tau->provenance, "fixture");
  std::vector<double> one = {1.7};
  EXPECT_EQ(ComputeTau(one, "x")->tau, 1.7);
  EXPECT_FALSE(ComputeTau(std::vector<double>{}, "x").ok());
}

TEST(ComputeTauTest, FromModel) {
  std::vector<ParallelUnit> units = Units("m", 3);
  UnitLossFn fn = [](const ParallelUnit& u) { return u.unit_id == "m0" ? 3.0 : 0.0; };
  EXPECT_DOUBLE_EQ(ComputeTau(fn, units, "ref")->tau, 1.0);
}

TEST(ComputeTauTest, MemorizedFixtureIsBelowOneTenth) {
  // 64 pairs with distinct source and target words.
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  for (int i = 0; i < 64; ++i) {
    sources.push_back(absl::StrCat("q", i, " w", i % 8));
    targets.push_back(absl::StrCat("t", i));
  }
  VocabPair vocab{Vocabulary::FromTexts(sources), Vocabulary::FromTexts(targets)};
  std::vector<EncodedPair> pairs;
  for (int i = 0; i < 64; ++i) pairs.push_back(EncodePair(vocab, sources[i], targets[i]));
  Seq2SeqDims dims{vocab.source.size(), vocab.target.size(), 16};
  auto objective = Seq2SeqObjective::Create(dims, pairs);
  ASSERT_TRUE(objective.ok());
  TinySeq2Seq init = TinySeq2Seq::RandomInit(dims, 0);
  DpSgdConfig config{1e9, 0.0, 4, 64, 100.0, 4.0, 0, 4, 1};
  auto trained = Train(*objective, {init.params().begin(), init.params().end()},
                       config, nullptr);
  ASSERT_TRUE(trained.ok());
  std::vector<double> losses;
  for (size_t i = 0; i < 64; ++i) {
    losses.push_back(objective->Loss(trained->state.params, i));
  }
  EXPECT_LT(ComputeTau(losses, "fixture")->tau, 0.1);
}

TEST(BalancedMembersTest, SizeDeterminismAndErrors) {
  std::vector<ParallelUnit> train = Units("t", 50);
  auto a = BalancedMembers(train, 20, 7);
  auto b = BalancedMembers(train, 20, 7);
  ASSERT_TRUE(a.ok());
  ASSERT_EQ(a->size(), 20u);
  std::set<std::string> ids;
  for (size_t i = 0; i < a->size(); ++i) {
    EXPECT_EQ((*a)[i].unit_id, (*b)[i].unit_id);
    ids.insert((*a)[i].unit_id);
  }
  EXPECT_EQ(ids.size(), 20u);
  auto all = BalancedMembers(train, 50, 1);
  ASSERT_TRUE(all.ok());
  EXPECT_EQ(all->size(), 50u);
  EXPECT_FALSE(BalancedMembers(train, 51, 1).ok());
}

TEST(BalancedMembersTest, MaiaShapedFixture) {
  // 13,380 training sentences; 2,488 validation + 2,109 test nonmembers.
  std::vector<ParallelUnit> train = Units("t", 13380);
  const size_t nonmembers = 2488 + 2109;
  auto members = BalancedMembers(train, nonmembers, 0);
  ASSERT_TRUE(members.ok());
  EXPECT_EQ(members->size(), 4597u);
  std::set<std::string> ids;
  for (const ParallelUnit& u : *members) ids.insert(u.unit_id);
  EXPECT_EQ(ids.size(), 4597u);
}

TEST(ClassifyTest, CraftedConfusionMatrix) {
  // Three members at or below tau, one above; one nonmember below, three
  // above.
  std::vector<LossRecord> records = {
      {"m1", Membership::kMember, 0.1},    {"m2", Membership::kMember, 0.5},
      {"m3", Membership::kMember, 1.0},    {"m4", Membership::kMember, 1.5},
      {"n1", Membership::kNonmember, 0.9}, {"n2", Membership::kNonmember, 1.1},
      {"n3", Membership::kNonmember, 2.0}, {"n4", Membership::kNonmember, 3.0}};
  MiaReport r = Classify(records, {1.0, "crafted"});
  EXPECT_EQ(r.tp, 3);
  EXPECT_EQ(r.fn, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.tn, 3);
  EXPECT_EQ(r.tpr, 0.75);
  EXPECT_EQ(r.fpr, 0.25);
  EXPECT_EQ(r.advantage, 0.5);
  EXPECT_EQ(r.true_positive_ids, (std::vector<std::string>{"m1", "m2", "m3"}));
}

TEST(ClassifyTest, SingleRecordCases) {
  MiaReport below = Classify(std::vector<LossRecord>{{"a", Membership::kMember, 0.5}},
                             {1.0, ""});
  EXPECT_EQ(below.tp, 1);
  MiaReport boundary =
      Classify(std::vector<LossRecord>{{"a", Membership::kMember, 1.0}}, {1.0, ""});
  EXPECT_EQ(boundary.tp, 1);
}

TEST(ClassifyTest, AdvantageCanBeNegative) {
  std::vector<LossRecord> records = {{"m", Membership::kMember, 2.0},
                                     {"n", Membership::kNonmember, 0.1}};
  MiaReport r = Classify(records, {1.0, ""});
  EXPECT_EQ(r.advantage, -1.0);
}

TEST(ClassifyTest, RatesSatisfyDefinitions) {
  std::vector<LossRecord> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back({absl::StrCat("r", i),
                       i % 3 == 0 ? Membership::kMember : Membership::kNonmember,
                       (i * 37 % 17) / 10.0});
  }
  MiaReport r = Classify(records, {0.8, ""});
  EXPECT_DOUBLE_EQ(r.tpr, static_cast<double>(r.tp) / (r.tp + r.fn));
  EXPECT_DOUBLE_EQ(r.fpr, static_cast<double>(r.fp) / (r.fp + r.tn));
  EXPECT_DOUBLE_EQ(r.advantage, r.tpr - r.fpr);
  EXPECT_EQ(r.tp + r.fp + r.tn + r.fn, 40);
}

TEST(AttackModelTest, ConstantLossHasNoAdvantage) {
  std::vector<ParallelUnit> members = Units("m", 10);
  std::vector<ParallelUnit> nonmembers = Units("n", 10);
  UnitLossFn constant = [](const ParallelUnit&) { return 0.7; };
  for (double tau : {0.5, 0.7, 0.9}) {
    auto r = AttackModel(constant, members, nonmembers, {tau, ""});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->tpr, r->fpr);
    EXPECT_EQ(r->advantage, 0.0);
  }
}

TEST(AttackModelTest, PerfectSeparation) {
  std::vector<ParallelUnit> members = Units("m", 10);
  std::vector<ParallelUnit> nonmembers = Units("n", 10);
  UnitLossFn separating = [](const ParallelUnit& u) {
    return u.unit_id[0] == 'm' ? 0.01 : 5.0;
  };
  auto r = AttackModel(separating, members, nonmembers, {1.0, ""});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->advantage, 1.0);
  EXPECT_EQ(r->true_positive_ids.size(), 10u);
}

TEST(AttackModelTest, RejectsImbalanceAndOverlap) {
  UnitLossFn fn = [](const ParallelUnit&) { return 0.0; };
  std::vector<ParallelUnit> members = Units("m", 3);
  EXPECT_FALSE(AttackModel(fn, members, Units("n", 4), {1.0, ""}).ok());
  EXPECT_FALSE(AttackModel(fn, members, Units("m", 3), {1.0, ""}).ok());
  EXPECT_FALSE(AttackModel(fn, {}, {}, {1.0, ""}).ok());
}

TEST(MiaCsvTest, RowAndTruePositivesRoundTrip) {
  MiaReport r;
  r.tp = 3;
  r.fp = 1;
  r.tn = 3;
  r.fn = 1;
  r.tpr = 0.75;
  r.fpr = 0.25;
  r.advantage = 0.5;
  r.threshold = {0.25, "x"};
  r.true_positive_ids = {"s:a:0", "s:b:3"};
  EXPECT_EQ(MiaCsvHeader(), "run_id,model_tag,epsilon,tau,tp,fp,tn,fn,tpr,fpr,advantage\n");
  EXPECT_EQ(MiaCsvRow("sen-epsinf-seed0", "sen", 1.0 / 0.0, r),
            "sen-epsinf-seed0,sen,inf,0.25,3,1,3,1,0.75,0.25,0.5\n");
  auto ids = ParseTruePositivesJsonl(TruePositivesToJsonl(r));
  ASSERT_TRUE(ids.ok());
  EXPECT_EQ(*ids, r.true_positive_ids);
}

}  // namespace
}  // namespace dpgran
