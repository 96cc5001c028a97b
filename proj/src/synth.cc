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

#include "dpgran/synth.h"

#include <algorithm>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "dpgran/fake_pii.h"

namespace dpgran {
namespace {

struct Line {
  const char* source;
  const char* target;
};

struct Exchange {
  Line customer;
  Line agent;
};

struct Slot {
  const char* source;
  const char* target;
};

constexpr const char* kAgent = "Agent";
constexpr const char* kCustomer = "Customer";

const std::vector<Slot>& Products() {
  static const auto* v = new std::vector<Slot>{
      {"Drucker", "printer"},          {"Lampe", "lamp"},
      {"Kaffeemaschine", "coffee machine"}, {"Tastatur", "keyboard"},
      {"Monitor", "monitor"},          {"Rucksack", "backpack"},
      {"Wasserkocher", "kettle"},      {"Staubsauger", "vacuum cleaner"},
      {"Toaster", "toaster"},          {"Kopfhoerer", "headphones"},
      {"Fahrradhelm", "bike helmet"},  {"Mixer", "blender"}};
  return *v;
}

const std::vector<Slot>& Days() {
  static const auto* v = new std::vector<Slot>{
      {"Montag", "Monday"},     {"Dienstag", "Tuesday"},
      {"Mittwoch", "Wednesday"}, {"Donnerstag", "Thursday"},
      {"Freitag", "Friday"},    {"Samstag", "Saturday"}};
  return *v;
}

const std::vector<Slot>& Problems() {
  static const auto* v = new std::vector<Slot>{
      {"kaputt", "broken"},
      {"zu laut", "too loud"},
      {"beschaedigt", "damaged"},
      {"nicht vollstaendig", "incomplete"},
      {"sehr langsam", "very slow"}};
  return *v;
}

const std::vector<Exchange>& PlainExchanges() {
  static const auto* v = new std::vector<Exchange>{
      {{"Mein {P} ist {X} .", "My {P} is {X} ."},
       {"Das tut mir leid zu hoeren .", "I am sorry to hear that ."}},
      {{"Ich habe den {P} am {D} bestellt .", "I ordered the {P} on {D} ."},
       {"Die Lieferung kommt am {D} .", "The delivery will arrive on {D} ."}},
      {{"Kann ich den {P} zurueckgeben ?", "Can I return the {P} ?"},
       {"Sie koennen den {P} innerhalb von dreissig Tagen zurueckgeben .",
        "You can return the {P} within thirty days ."}},
      {{"Der {P} ist {X} .", "The {P} is {X} ."},
       {"Ich schicke Ihnen einen neuen {P} .", "I will send you a new {P} ."}},
      {{"Wann kommt die Lieferung ?", "When will the delivery arrive ?"},
       {"Der {P} wird am {D} geliefert .", "The {P} will be delivered on {D} ."}},
  };
  return *v;
}

const std::vector<Exchange>& PiiExchanges() {
  static const auto* v = new std::vector<Exchange>{
      {{"Meine Bestellnummer ist #ORDER# .", "My order number is #ORDER# ."},
       {"Danke , ich habe die Bestellung #ORDER# gefunden .",
        "Thank you , I found the order #ORDER# ."}},
      {{"Die Bestellung #ORDER# ist nicht angekommen .",
        "The order #ORDER# has not arrived ."},
       {"Ich pruefe die Bestellung #ORDER# sofort .",
        "I will check the order #ORDER# right away ."}},
      {{"Meine E-Mail ist #EMAIL# .", "My email is #EMAIL# ."},
       {"Ich sende die Bestaetigung an #EMAIL# .",
        "I will send the confirmation to #EMAIL# ."}},
      {{"Sie erreichen mich unter #PHONE# .", "You can reach me at #PHONE# ."},
       {"Wir rufen Sie unter #PHONE# zurueck .",
        "We will call you back at #PHONE# ."}},
      {{"Ist die Rechnung auf #URL# ?", "Is the invoice on #URL# ?"},
       {"Ja , auf #URL# finden Sie alle Rechnungen .",
        "Yes , on #URL# you find all invoices ."}},
      {{"Ich habe bei #PRS_ORG# bestellt .", "I ordered from #PRS_ORG# ."},
       {"#PRS_ORG# entschuldigt sich fuer die Verzoegerung .",
        "#PRS_ORG# apologizes for the delay ."}},
      {{"Mein Name ist #NAME# .", "My name is #NAME# ."},
       {"Danke , #NAME# .", "Thank you , #NAME# ."}},
  };
  return *v;
}

// Greeting and closing come in matched pairs so every entity they mention
// appears twice.
const std::vector<std::pair<Line, Line>>& PiiBookends() {
  static const auto* v = new std::vector<std::pair<Line, Line>>{
      {{"Guten Morgen #NAME# , willkommen bei #PRS_ORG# .",
        "Good morning #NAME# , welcome to #PRS_ORG# ."},
       {"Danke , dass Sie #PRS_ORG# gewaehlt haben , auf Wiedersehen #NAME# .",
        "Thank you for choosing #PRS_ORG# , goodbye #NAME# ."}},
      {{"Hallo #NAME# , wie kann ich Ihnen helfen ?",
        "Hello #NAME# , how can I help you ?"},
       {"Einen schoenen Tag noch , #NAME# .", "Have a nice day , #NAME# ."}},
  };
  return *v;
}

constexpr Line kPlainGreeting = {"Guten Morgen , wie kann ich helfen ?",
                                 "Good morning , how can I help ?"};
constexpr Line kPlainClosing = {"Auf Wiedersehen und einen schoenen Tag .",
                                "Goodbye and have a nice day ."};
constexpr Line kCustomerThanks = {"Okay , vielen Dank .",
                                  "Okay , thank you very much ."};

template <typename T>
const T& PickFrom(const std::vector<T>& options, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> index(0, options.size() - 1);
  return options[index(rng)];
}

struct SlotFill {
  Slot product;
  Slot day;
  Slot problem;
};

std::string Fill(const char* text, const SlotFill& fill, bool source_side) {
  auto pick = [source_side](const Slot& s) {
    return source_side ? s.source : s.target;
  };
  return absl::StrReplaceAll(text, {{"{P}", pick(fill.product)},
                                    {"{D}", pick(fill.day)},
                                    {"{X}", pick(fill.problem)}});
}

}  // namespace

absl::StatusOr<SyntheticCorpus> SynthesizeCorpus(const SynthOptions& options) {
  if (options.n_dialogues < 1) {
    return absl::InvalidArgumentError("n_dialogues must be at least 1");
  }
  if (!(options.pii_density >= 0.0 && options.pii_density <= 1.0)) {
    return absl::InvalidArgumentError("pii_density must lie in [0, 1]");
  }
  const int turns_min = std::max(2, options.turns_min);
  const int turns_max = std::max(turns_min, options.turns_max);
  const int width = std::max<int>(
      4, static_cast<int>(absl::StrCat(options.n_dialogues - 1).size()));

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> turn_count(turns_min, turns_max);
  std::bernoulli_distribution pii_exchange(options.pii_density);
  const bool with_pii = options.pii_density > 0.0;

  std::vector<Utterance> utterances;
  for (int d = 0; d < options.n_dialogues; ++d) {
    const std::string dialogue_id =
        absl::StrFormat("%s-%0*d", options.id_prefix, width, d);
    const int turns = turn_count(rng);
    int turn = 0;
    auto emit = [&](const char* speaker, const std::string& source,
                    const std::string& target) {
      utterances.push_back({dialogue_id, turn++, speaker, source, target});
    };

    const std::pair<Line, Line> bookends =
        with_pii ? PickFrom(PiiBookends(), rng)
                 : std::pair<Line, Line>{kPlainGreeting, kPlainClosing};
    emit(kAgent, bookends.first.source, bookends.first.target);

    const int middle = turns - 2;
    for (int e = 0; e < middle / 2; ++e) {
      SlotFill fill{PickFrom(Products(), rng), PickFrom(Days(), rng),
                    PickFrom(Problems(), rng)};
      const Exchange& exchange = pii_exchange(rng)
                                     ? PickFrom(PiiExchanges(), rng)
                                     : PickFrom(PlainExchanges(), rng);
      emit(kCustomer, Fill(exchange.customer.source, fill, true),
           Fill(exchange.customer.target, fill, false));
      emit(kAgent, Fill(exchange.agent.source, fill, true),
           Fill(exchange.agent.target, fill, false));
    }
    if (middle % 2 == 1) {
      emit(kCustomer, kCustomerThanks.source, kCustomerThanks.target);
    }
    emit(kAgent, bookends.second.source, bookends.second.target);
  }

  absl::StatusOr<PiiReplacement> replaced =
      ReplacePii(utterances, options.locale, options.seed);
  if (!replaced.ok()) return replaced.status();
  return SyntheticCorpus{std::move(replaced->utterances),
                         std::move(replaced->ledger)};
}

}  // namespace dpgran
