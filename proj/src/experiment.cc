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

#include "dpgran/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpgran/checkpoint.h"
#include "dpgran/csv.h"
#include "dpgran/dpsgd.h"
#include "dpgran/metrics.h"
#include "dpgran/seq2seq.h"
#include "dpgran/synth.h"
#include "json.hpp"

namespace dpgran {
namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string Join(const std::string& a, const std::string& b) {
  return (fs::path(a) / b).string();
}

std::string DataDir(const std::string& out) { return Join(out, "data"); }

void Log(const RunnerOptions& options, const std::string& message) {
  if (options.log) options.log(message);
}

absl::Status Annotate(const absl::Status& status, const std::string& context) {
  if (status.ok()) return status;
  return absl::Status(status.code(),
                      absl::StrCat(context, ": ", std::string(status.message())));
}

absl::Status MakeDirs(const std::string& path) {
  std::error_code error;
  fs::create_directories(path, error);
  if (error) {
    return absl::InternalError(
        absl::StrCat("cannot create ", path, ": ", error.message()));
  }
  return absl::OkStatus();
}

std::string LinesToText(const std::vector<std::string>& lines) {
  std::string text;
  for (const std::string& line : lines) {
    text += line;
    text += '\n';
  }
  return text;
}

std::vector<std::string> TextToLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) lines.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::vector<ParallelUnit> FilterByDialogue(
    const std::vector<ParallelUnit>& units,
    const std::vector<std::string>& dialogues) {
  const std::set<std::string> keep(dialogues.begin(), dialogues.end());
  std::vector<ParallelUnit> out;
  for (const ParallelUnit& unit : units) {
    if (keep.contains(unit.dialogue_id)) out.push_back(unit);
  }
  return out;
}

std::vector<ParallelUnit> PublicDocuments(const ExperimentConfig& config) {
  SynthOptions options = config.synth;
  options.n_dialogues = config.public_dialogues;
  options.pii_density = 0.0;
  options.seed = config.public_seed;
  options.id_prefix = "pub";
  absl::StatusOr<SyntheticCorpus> corpus = SynthesizeCorpus(options);
  if (!corpus.ok()) return {};
  std::vector<SentencePair> pairs;
  for (const ParallelUnit& unit : ToSentenceUnits(corpus->utterances)) {
    pairs.push_back({unit.source, unit.target});
  }
  return BuildTokenBudgetDocuments(pairs, config.public_token_budget);
}

absl::StatusOr<std::vector<ParallelUnit>> ReadUnits(const std::string& path) {
  auto text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  auto units = ParseUnitsJsonl(*text);
  if (!units.ok()) return Annotate(units.status(), path);
  return units;
}

absl::StatusOr<std::vector<std::string>> ReadLines(const std::string& path) {
  auto text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  return TextToLines(*text);
}

absl::StatusOr<Vocabulary> ReadVocabulary(const std::string& path) {
  auto tokens = ReadLines(path);
  if (!tokens.ok()) return tokens.status();
  auto vocab = Vocabulary::FromTokens(*tokens);
  if (!vocab.ok()) return Annotate(vocab.status(), path);
  return vocab;
}

bool IsPrivate(double epsilon) { return !std::isinf(epsilon); }

const std::vector<ParallelUnit>& TrainingUnits(const PreparedData& data,
                                               ModelTag tag) {
  switch (tag) {
    case ModelTag::kSen:
      return data.train_sentences;
    case ModelTag::kDoc:
    case ModelTag::kAugdoc:
      return data.train_documents;
    case ModelTag::kAugdocZeroShot:
      return data.public_documents;
  }
  return data.train_sentences;
}

bool IsSentenceModel(ModelTag tag) { return tag == ModelTag::kSen; }

struct Plan {
  DpSgdConfig dp;
  MechanismParams mechanism;
};

// Resolves the optimizer and noise settings for a run.
absl::StatusOr<Plan> PlanRun(const ExperimentConfig& config,
                             const PreparedData& data, const RunKey& key) {
  if (!(key.epsilon > 0.0)) {
    return absl::InvalidArgumentError("epsilon must be positive or inf");
  }
  if (key.tag == ModelTag::kAugdocZeroShot && IsPrivate(key.epsilon)) {
    return absl::InvalidArgumentError(
        "augdoc-zero-shot trains on public data only; use --epsilon inf");
  }
  const bool is_private = IsPrivate(key.epsilon);
  const TrainSpec& spec = TrainSpecFor(config, key.tag, is_private);
  const auto n = static_cast<int64_t>(TrainingUnits(data, key.tag).size());
  if (n == 0) {
    return absl::FailedPreconditionError(absl::StrCat(
        "no training units for ", std::string(ModelTagName(key.tag))));
  }
  if (spec.lot_size > n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lot_size ", spec.lot_size, " exceeds the ", n, " training units of ",
        std::string(ModelTagName(key.tag))));
  }
  Plan plan;
  plan.dp.clip_bound = is_private ? spec.clip_bound : kInf;
  plan.dp.noise_multiplier = 0.0;
  plan.dp.lot_size = spec.lot_size;
  plan.dp.dataset_size = n;
  plan.dp.epochs = spec.epochs;
  plan.dp.learning_rate = spec.learning_rate;
  plan.dp.seed = key.seed;
  plan.dp.accumulation_chunk = spec.accumulation_chunk;
  plan.dp.num_threads = spec.num_threads;
  plan.mechanism.sampling_rate = plan.dp.sampling_rate();
  plan.mechanism.steps = plan.dp.steps();
  plan.mechanism.noise_multiplier = 0.0;
  if (is_private) {
    auto sigma = CalibrateNoiseMultiplier({key.epsilon, config.delta},
                                          plan.mechanism.sampling_rate,
                                          plan.mechanism.steps);
    if (!sigma.ok()) return sigma.status();
    plan.dp.noise_multiplier = *sigma;
    plan.mechanism.noise_multiplier = *sigma;
  }
  return plan;
}

std::string EpsilonText(double epsilon) { return FormatDouble(epsilon); }

RunKey ReferenceKey(const ExperimentConfig& config) {
  return {ModelTag::kSen, kInf, config.seeds.front()};
}

absl::StatusOr<Checkpoint> LoadRunCheckpoint(const std::string& dir,
                                             const VocabPair& vocab) {
  const std::string path = Join(dir, "checkpoint.bin");
  if (!fs::exists(path)) {
    return absl::FailedPreconditionError(
        absl::StrCat("missing checkpoint ", path, "; train the run first"));
  }
  auto checkpoint = LoadCheckpoint(path);
  if (!checkpoint.ok()) return checkpoint.status();
  if (auto status = CheckVocabulary(*checkpoint, vocab); !status.ok()) {
    return Annotate(status, path);
  }
  return checkpoint;
}

double MeanLoss(const TinySeq2Seq& model, const VocabPair& vocab,
                const std::vector<ParallelUnit>& units) {
  Seq2SeqTranslator translator(model, vocab);
  double sum = 0.0;
  for (const ParallelUnit& unit : units) {
    sum += translator.PairLoss(unit.source, unit.target);
  }
  return units.empty() ? 0.0 : sum / static_cast<double>(units.size());
}

// Reads the single data row of a two-line CSV file as column -> value.
absl::StatusOr<std::map<std::string, std::string>> ReadCsvRecord(
    const std::string& path) {
  auto lines = ReadLines(path);
  if (!lines.ok()) return lines.status();
  if (lines->size() != 2) {
    return absl::DataLossError(
        absl::StrCat(path, ": expected a header and one row"));
  }
  const std::vector<std::string> header = ParseCsvLine((*lines)[0]);
  const std::vector<std::string> row = ParseCsvLine((*lines)[1]);
  if (header.size() != row.size()) {
    return absl::DataLossError(absl::StrCat(path, ": ragged row"));
  }
  std::map<std::string, std::string> record;
  for (size_t i = 0; i < header.size(); ++i) record[header[i]] = row[i];
  return record;
}

struct Moments {
  int64_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};

Moments Summarize(const std::vector<double>& values) {
  Moments m;
  m.n = static_cast<int64_t>(values.size());
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(m.n - 1));
  }
  return m;
}

int TagOrder(ModelTag tag) {
  switch (tag) {
    case ModelTag::kSen:
      return 0;
    case ModelTag::kDoc:
      return 1;
    case ModelTag::kAugdocZeroShot:
      return 2;
    case ModelTag::kAugdoc:
      return 3;
  }
  return 4;
}

absl::StatusOr<double> ParseEpsilon(const std::string& text) {
  if (text == "inf") return kInf;
  double value = 0.0;
  if (!absl::SimpleAtod(text, &value)) {
    return absl::DataLossError(absl::StrCat("bad epsilon '", text, "'"));
  }
  return value;
}

}  // namespace

std::string OutputDir(const ExperimentConfig& config,
                      const RunnerOptions& options) {
  return options.output_dir.empty() ? config.output_dir : options.output_dir;
}

std::vector<double> ResolveEpsilons(const ExperimentConfig& config,
                                    int max_utterances) {
  if (!config.epsilon_ladder) return config.epsilons;
  return EpsilonLadder(config.epsilon_base, max_utterances);
}

absl::Status CmdPrepare(const ExperimentConfig& config,
                        const RunnerOptions& options) {
  std::vector<Utterance> utterances;
  std::vector<PiiLedgerEntry> ledger;
  if (config.synthetic) {
    auto corpus = SynthesizeCorpus(config.synth);
    if (!corpus.ok()) return Annotate(corpus.status(), "corpus");
    utterances = std::move(corpus->utterances);
    ledger = std::move(corpus->ledger);
  } else {
    if (!fs::exists(config.corpus_path)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "corpus.path: no such file '", config.corpus_path, "'"));
    }
    auto loaded = LoadUtterancesJsonl(config.corpus_path);
    if (!loaded.ok()) return Annotate(loaded.status(), "corpus.path");
    utterances = *std::move(loaded);
    if (!config.ledger_path.empty()) {
      auto text = ReadFileToString(config.ledger_path);
      if (!text.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "corpus.ledger: cannot read '", config.ledger_path, "'"));
      }
      auto parsed = ParseLedgerJsonl(*text);
      if (!parsed.ok()) return Annotate(parsed.status(), "corpus.ledger");
      ledger = *std::move(parsed);
    }
  }

  auto split = SplitByDialogue(utterances, config.split);
  if (!split.ok()) return Annotate(split.status(), "corpus split");
  if (split->train_dialogues.empty() ||
      split->val_dialogues.size() + split->test_dialogues.size() == 0) {
    return absl::InvalidArgumentError(
        "corpus too small: the split needs training and held-out dialogues");
  }

  const std::vector<ParallelUnit> sentences = ToSentenceUnits(utterances);
  const std::vector<ParallelUnit> documents = ToDocumentUnits(utterances);
  const std::vector<ParallelUnit> train_sentences =
      FilterByDialogue(sentences, split->train_dialogues);
  std::vector<ParallelUnit> nonmembers =
      FilterByDialogue(sentences, split->val_dialogues);
  const std::vector<ParallelUnit> test_sentences =
      FilterByDialogue(sentences, split->test_dialogues);
  nonmembers.insert(nonmembers.end(), test_sentences.begin(),
                    test_sentences.end());
  auto members =
      BalancedMembers(train_sentences, nonmembers.size(), config.member_seed);
  if (!members.ok()) return Annotate(members.status(), "member sample");
  const std::vector<ParallelUnit> public_documents = PublicDocuments(config);

  std::vector<std::string> source_texts;
  std::vector<std::string> target_texts;
  for (const ParallelUnit& unit : train_sentences) {
    source_texts.push_back(unit.source);
    target_texts.push_back(unit.target);
  }
  for (const ParallelUnit& unit : public_documents) {
    source_texts.push_back(unit.source);
    target_texts.push_back(unit.target);
  }
  const Vocabulary source_vocab = Vocabulary::FromTexts(source_texts);
  const Vocabulary target_vocab = Vocabulary::FromTexts(target_texts);

  const int max_utterances = MaxUtterancesPerDialogue(utterances);
  std::vector<std::string> member_ids;
  for (const ParallelUnit& unit : *members) member_ids.push_back(unit.unit_id);

  nlohmann::ordered_json manifest;
  manifest["dialogues"] = DialogueIds(utterances).size();
  manifest["max_utterances"] = max_utterances;
  manifest["sentence_units"] = sentences.size();
  manifest["document_units"] = documents.size();
  manifest["train_sentence_units"] = train_sentences.size();
  manifest["nonmember_units"] = nonmembers.size();
  manifest["public_documents"] = public_documents.size();
  manifest["source_vocab"] = source_vocab.size();
  manifest["target_vocab"] = target_vocab.size();
  std::vector<std::string> epsilons;
  for (double eps : ResolveEpsilons(config, max_utterances)) {
    epsilons.push_back(EpsilonText(eps));
  }
  manifest["epsilons"] = epsilons;

  const std::string dir = DataDir(OutputDir(config, options));
  if (auto s = MakeDirs(dir); !s.ok()) return s;
  const std::vector<std::pair<std::string, std::string>> files = {
      {"utterances.jsonl", UtterancesToJsonl(utterances)},
      {"ledger.jsonl", LedgerToJsonl(ledger)},
      {"sentence_units.jsonl", UnitsToJsonl(sentences)},
      {"document_units.jsonl", UnitsToJsonl(documents)},
      {"split_train.txt", LinesToText(split->train_dialogues)},
      {"split_val.txt", LinesToText(split->val_dialogues)},
      {"split_test.txt", LinesToText(split->test_dialogues)},
      {"members.txt", LinesToText(member_ids)},
      {"public_units.jsonl", UnitsToJsonl(public_documents)},
      {"vocab_source.txt", LinesToText(source_vocab.tokens())},
      {"vocab_target.txt", LinesToText(target_vocab.tokens())},
      {"manifest.json", manifest.dump(2) + "\n"},
  };
  for (const auto& [name, contents] : files) {
    if (auto s = WriteStringToFile(Join(dir, name), contents); !s.ok()) {
      return s;
    }
  }
  Log(options, absl::StrCat("prepared ", sentences.size(), " sentence and ",
                            documents.size(), " document units in ", dir));
  return absl::OkStatus();
}

absl::StatusOr<PreparedData> LoadPreparedData(const std::string& output_dir) {
  const std::string dir = DataDir(output_dir);
  const std::string manifest_path = Join(dir, "manifest.json");
  if (!fs::exists(manifest_path)) {
    return absl::FailedPreconditionError(
        absl::StrCat("no prepared data in ", dir, "; run prepare first"));
  }
  PreparedData data;
  auto manifest_text = ReadFileToString(manifest_path);
  if (!manifest_text.ok()) return manifest_text.status();
  nlohmann::json manifest =
      nlohmann::json::parse(*manifest_text, nullptr, false);
  if (manifest.is_discarded()) {
    return absl::DataLossError(absl::StrCat(manifest_path, ": invalid JSON"));
  }
  try {
    data.max_utterances = manifest.at("max_utterances").get<int>();
    for (const auto& eps : manifest.at("epsilons")) {
      auto value = ParseEpsilon(eps.get<std::string>());
      if (!value.ok()) return value.status();
      data.epsilons.push_back(*value);
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat(manifest_path, ": ", e.what()));
  }

  auto utterances = LoadUtterancesJsonl(Join(dir, "utterances.jsonl"));
  if (!utterances.ok()) return utterances.status();
  data.utterances = *std::move(utterances);
  auto ledger_text = ReadFileToString(Join(dir, "ledger.jsonl"));
  if (!ledger_text.ok()) return ledger_text.status();
  auto ledger = ParseLedgerJsonl(*ledger_text);
  if (!ledger.ok()) return ledger.status();
  data.ledger = *std::move(ledger);

  auto sentences = ReadUnits(Join(dir, "sentence_units.jsonl"));
  if (!sentences.ok()) return sentences.status();
  auto documents = ReadUnits(Join(dir, "document_units.jsonl"));
  if (!documents.ok()) return documents.status();
  auto train = ReadLines(Join(dir, "split_train.txt"));
  auto val = ReadLines(Join(dir, "split_val.txt"));
  auto test = ReadLines(Join(dir, "split_test.txt"));
  if (!train.ok()) return train.status();
  if (!val.ok()) return val.status();
  if (!test.ok()) return test.status();
  data.train_sentences = FilterByDialogue(*sentences, *train);
  data.train_documents = FilterByDialogue(*documents, *train);
  data.test_sentences = FilterByDialogue(*sentences, *test);
  data.test_documents = FilterByDialogue(*documents, *test);
  data.nonmembers = FilterByDialogue(*sentences, *val);
  data.nonmembers.insert(data.nonmembers.end(), data.test_sentences.begin(),
                         data.test_sentences.end());

  auto member_ids = ReadLines(Join(dir, "members.txt"));
  if (!member_ids.ok()) return member_ids.status();
  std::map<std::string, const ParallelUnit*> by_id;
  for (const ParallelUnit& unit : data.train_sentences) {
    by_id[unit.unit_id] = &unit;
  }
  for (const std::string& id : *member_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      return absl::DataLossError(
          absl::StrCat("member ", id, " is not a training sentence unit"));
    }
    data.members.push_back(*it->second);
  }

  auto public_documents = ReadUnits(Join(dir, "public_units.jsonl"));
  if (!public_documents.ok()) return public_documents.status();
  data.public_documents = *std::move(public_documents);
  auto source_vocab = ReadVocabulary(Join(dir, "vocab_source.txt"));
  if (!source_vocab.ok()) return source_vocab.status();
  auto target_vocab = ReadVocabulary(Join(dir, "vocab_target.txt"));
  if (!target_vocab.ok()) return target_vocab.status();
  data.vocab = {*std::move(source_vocab), *std::move(target_vocab)};
  return data;
}

std::string RunId(const RunKey& key) {
  return absl::StrCat(std::string(ModelTagName(key.tag)), "-eps",
                      EpsilonText(key.epsilon), "-seed", key.seed);
}

std::string RunDir(const std::string& output_dir, const RunKey& key) {
  return Join(Join(output_dir, "runs"), RunId(key));
}

absl::StatusOr<RunRecord> CmdTrain(const ExperimentConfig& config,
                                   const RunKey& key,
                                   const RunnerOptions& options) {
  const std::string out = OutputDir(config, options);
  auto data = LoadPreparedData(out);
  if (!data.ok()) return data.status();
  auto plan = PlanRun(config, *data, key);
  if (!plan.ok()) return plan.status();

  RunRecord record;
  record.key = key;
  record.run_id = RunId(key);
  record.dir = RunDir(out, key);
  record.mechanism = plan->mechanism;
  record.clip_bound = plan->dp.clip_bound;

  const std::string checkpoint_path = Join(record.dir, "checkpoint.bin");
  if (fs::exists(record.dir) && !fs::is_empty(record.dir)) {
    if (!options.overwrite) {
      return absl::AlreadyExistsError(absl::StrCat(
          "run ", record.run_id, " already exists; pass --overwrite"));
    }
    fs::remove_all(record.dir);
    const RunKey reference = ReferenceKey(config);
    if (RunId(reference) == record.run_id) fs::remove(Join(out, "tau.json"));
  }

  const VocabPair& vocab = data->vocab;
  const Seq2SeqDims dims{vocab.source.size(), vocab.target.size(), config.dim};
  std::vector<double> init;
  if (key.tag == ModelTag::kAugdoc) {
    const RunKey prior{ModelTag::kAugdocZeroShot, kInf, key.seed};
    auto checkpoint = LoadRunCheckpoint(RunDir(out, prior), vocab);
    if (!checkpoint.ok()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "augdoc continues from ", RunId(prior), ": ",
          std::string(checkpoint.status().message())));
    }
    if (checkpoint->model.dims().dim != config.dim) {
      return absl::FailedPreconditionError(
          absl::StrCat(RunId(prior), " has a different model.dim"));
    }
    const auto params = checkpoint->model.params();
    init.assign(params.begin(), params.end());
  } else {
    const auto params = TinySeq2Seq::RandomInit(dims, key.seed).params();
    init.assign(params.begin(), params.end());
  }

  const std::vector<ParallelUnit>& units = TrainingUnits(*data, key.tag);
  std::vector<EncodedPair> pairs;
  pairs.reserve(units.size());
  for (const ParallelUnit& unit : units) {
    pairs.push_back(EncodePair(vocab, unit.source, unit.target));
  }
  auto objective = Seq2SeqObjective::Create(dims, std::move(pairs));
  if (!objective.ok()) return objective.status();

  AccountantHook accountant;
  if (IsPrivate(key.epsilon)) accountant = RdpAccountantHook(config.delta);
  Log(options, absl::StrFormat("train %s: sigma=%g q=%g steps=%d",
                               record.run_id, plan->mechanism.noise_multiplier,
                               plan->mechanism.sampling_rate,
                               plan->mechanism.steps));
  auto result = Train(*objective, std::move(init), plan->dp, accountant);
  if (!result.ok()) return Annotate(result.status(), record.run_id);
  record.privacy = result->privacy;

  auto model = TinySeq2Seq::Create(dims, result->state.params);
  if (!model.ok()) return model.status();
  record.train_mean_loss = MeanLoss(*model, vocab, units);

  const bool sentence = IsSentenceModel(key.tag);
  const std::vector<ParallelUnit>& test =
      sentence ? data->test_sentences : data->test_documents;
  const int max_len = sentence
                          ? config.max_decode_len
                          : config.max_decode_len * std::max(1, data->max_utterances);
  Seq2SeqTranslator translator(*model, vocab);
  std::vector<std::string> hypotheses;
  std::vector<std::string> references;
  for (const ParallelUnit& unit : test) {
    hypotheses.push_back(translator.Translate(unit.source, max_len));
    references.push_back(unit.target);
  }
  BleuReport bleu;
  if (!test.empty()) {
    auto report = CorpusBleu(hypotheses, references,
                             BleuOptions{.smooth = config.bleu_smoothing});
    if (!report.ok()) return report.status();
    bleu = *report;
  }
  record.bleu = bleu.bleu;

  if (auto s = MakeDirs(record.dir); !s.ok()) return s;
  Checkpoint checkpoint{*model, vocab.source.Fingerprint(),
                        vocab.target.Fingerprint()};
  if (auto s = SaveCheckpoint(checkpoint_path, checkpoint); !s.ok()) return s;

  std::string history = LossHistoryCsvHeader();
  for (const StepSummary& summary : result->history) {
    history += LossHistoryCsvRow(summary);
  }
  const PrivacyParams accounted =
      record.privacy.value_or(PrivacyParams{kInf, config.delta});
  const std::string granularity =
      std::string(GranularityName(sentence ? Granularity::kSentence
                                           : Granularity::kDocument));
  const std::string model_tag(ModelTagName(key.tag));

  nlohmann::ordered_json run;
  run["run_id"] = record.run_id;
  run["model_tag"] = model_tag;
  run["epsilon"] = EpsilonText(key.epsilon);
  run["seed"] = key.seed;
  run["training_units"] = units.size();
  run["noise_multiplier"] = record.mechanism.noise_multiplier;
  run["sampling_rate"] = record.mechanism.sampling_rate;
  run["steps"] = record.mechanism.steps;
  run["clip_bound"] = EpsilonText(record.clip_bound);
  run["learning_rate"] = plan->dp.learning_rate;
  run["accounted_epsilon"] = EpsilonText(accounted.epsilon);
  run["delta"] = config.delta;
  run["train_mean_loss"] = record.train_mean_loss;
  run["bleu"] = record.bleu;

  const std::vector<std::pair<std::string, std::string>> files = {
      {"loss_history.csv", history},
      {"accounting.csv",
       AccountingCsvHeader() +
           AccountingCsvRow(record.run_id, record.mechanism, accounted)},
      {"bleu.csv", BleuCsvHeader() + BleuCsvRow(record.run_id, model_tag,
                                                key.epsilon, granularity, bleu)},
      {"run.json", run.dump(2) + "\n"},
  };
  for (const auto& [name, contents] : files) {
    if (auto s = WriteStringToFile(Join(record.dir, name), contents); !s.ok()) {
      return s;
    }
  }
  Log(options, absl::StrFormat("  %s: train loss %.4f, bleu %.2f",
                               record.run_id, record.train_mean_loss,
                               100.0 * record.bleu));
  return record;
}

absl::StatusOr<Threshold> LoadOrComputeTau(const ExperimentConfig& config,
                                           const RunnerOptions& options) {
  const std::string out = OutputDir(config, options);
  const std::string path = Join(out, "tau.json");
  if (fs::exists(path)) {
    auto text = ReadFileToString(path);
    if (!text.ok()) return text.status();
    nlohmann::json object = nlohmann::json::parse(*text, nullptr, false);
    if (object.is_discarded() || !object.contains("tau") ||
        !object["tau"].is_number() || !object.contains("provenance")) {
      return absl::DataLossError(absl::StrCat(path, ": malformed"));
    }
    return Threshold{object["tau"].get<double>(),
                     object["provenance"].get<std::string>()};
  }
  auto data = LoadPreparedData(out);
  if (!data.ok()) return data.status();
  const RunKey reference = ReferenceKey(config);
  const std::string dir = RunDir(out, reference);
  if (!fs::exists(Join(dir, "checkpoint.bin"))) {
    return absl::FailedPreconditionError(absl::StrCat(
        "tau comes from the non-private sentence-level run ", RunId(reference),
        ", which has not been trained"));
  }
  auto checkpoint = LoadRunCheckpoint(dir, data->vocab);
  if (!checkpoint.ok()) return checkpoint.status();
  Seq2SeqTranslator translator(checkpoint->model, data->vocab);
  UnitLossFn loss = [&](const ParallelUnit& unit) {
    return translator.PairLoss(unit.source, unit.target);
  };
  auto tau = ComputeTau(
      loss, data->train_sentences,
      absl::StrCat("mean loss of ", RunId(reference), " over ",
                   data->train_sentences.size(), " training sentence units"));
  if (!tau.ok()) return tau.status();
  nlohmann::ordered_json object;
  object["tau"] = tau->tau;
  object["provenance"] = tau->provenance;
  if (auto s = WriteStringToFile(path, object.dump(2) + "\n"); !s.ok()) {
    return s;
  }
  return tau;
}

absl::StatusOr<MiaReport> CmdAttack(const ExperimentConfig& config,
                                    const RunKey& key,
                                    const RunnerOptions& options) {
  const std::string out = OutputDir(config, options);
  auto data = LoadPreparedData(out);
  if (!data.ok()) return data.status();
  const std::string dir = RunDir(out, key);
  auto checkpoint = LoadRunCheckpoint(dir, data->vocab);
  if (!checkpoint.ok()) return checkpoint.status();
  auto tau = LoadOrComputeTau(config, options);
  if (!tau.ok()) return tau.status();

  Seq2SeqTranslator translator(checkpoint->model, data->vocab);
  UnitLossFn loss = [&](const ParallelUnit& unit) {
    return translator.PairLoss(unit.source, unit.target);
  };
  auto report = AttackModel(loss, data->members, data->nonmembers, *tau);
  if (!report.ok()) return report.status();
  const std::string run_id = RunId(key);
  if (auto s = WriteStringToFile(
          Join(dir, "mia.csv"),
          MiaCsvHeader() + MiaCsvRow(run_id, std::string(ModelTagName(key.tag)),
                                     key.epsilon, *report));
      !s.ok()) {
    return s;
  }
  if (auto s = WriteStringToFile(Join(dir, "true_positives.jsonl"),
                                 TruePositivesToJsonl(*report));
      !s.ok()) {
    return s;
  }
  Log(options, absl::StrFormat("  %s: tpr %.3f fpr %.3f advantage %.3f",
                               run_id, report->tpr, report->fpr,
                               report->advantage));
  return report;
}

absl::StatusOr<LeakageReport> CmdPiiEval(const ExperimentConfig& config,
                                         const RunKey& key,
                                         const RunnerOptions& options) {
  const std::string out = OutputDir(config, options);
  auto data = LoadPreparedData(out);
  if (!data.ok()) return data.status();
  const std::string dir = RunDir(out, key);
  const std::string tp_path = Join(dir, "true_positives.jsonl");
  if (!fs::exists(tp_path)) {
    return absl::FailedPreconditionError(
        absl::StrCat("missing ", tp_path, "; run attack first"));
  }
  auto tp_text = ReadFileToString(tp_path);
  if (!tp_text.ok()) return tp_text.status();
  auto tp_ids = ParseTruePositivesJsonl(*tp_text);
  if (!tp_ids.ok()) return Annotate(tp_ids.status(), tp_path);

  std::map<std::string, const ParallelUnit*> members;
  for (const ParallelUnit& unit : data->members) members[unit.unit_id] = &unit;
  std::vector<ParallelUnit> true_positives;
  for (const std::string& id : *tp_ids) {
    auto it = members.find(id);
    if (it == members.end()) {
      return absl::DataLossError(
          absl::StrCat(tp_path, ": ", id, " is not a sampled member"));
    }
    true_positives.push_back(*it->second);
  }

  const Gazetteer gazetteer = Gazetteer::FromLedger(data->ledger);
  auto report = LeakagePercentage(true_positives, data->members, gazetteer);
  if (!report.ok()) return report.status();

  std::string spans;
  for (const ParallelUnit& unit : true_positives) {
    spans += SpansToJsonl(unit.unit_id, DetectPii(unit.target, gazetteer));
  }
  const std::string run_id = RunId(key);
  if (auto s = WriteStringToFile(
          Join(dir, "pii.csv"),
          LeakageCsvHeader() +
              LeakageCsvRow(run_id, std::string(ModelTagName(key.tag)),
                            key.epsilon, *report));
      !s.ok()) {
    return s;
  }
  if (auto s = WriteStringToFile(Join(dir, "spans.jsonl"), spans); !s.ok()) {
    return s;
  }
  Log(options, absl::StrFormat("  %s: leakage %d/%d", run_id,
                               report->detected_pii_count,
                               report->total_pii_count));
  return report;
}

absl::StatusOr<std::string> CmdAccount(const ExperimentConfig& config,
                                       const RunKey& key,
                                       const RunnerOptions& options) {
  auto data = LoadPreparedData(OutputDir(config, options));
  if (!data.ok()) return data.status();
  auto plan = PlanRun(config, *data, key);
  if (!plan.ok()) return plan.status();
  PrivacyParams privacy{kInf, config.delta};
  if (IsPrivate(key.epsilon)) {
    auto accounted = AccountDpSgd(plan->mechanism, config.delta);
    if (!accounted.ok()) return accounted.status();
    privacy = *accounted;
  }
  return AccountingCsvHeader() +
         AccountingCsvRow(RunId(key), plan->mechanism, privacy);
}

absl::Status CmdReport(const std::string& output_dir) {
  const std::string runs_dir = Join(output_dir, "runs");
  std::vector<std::string> run_dirs;
  if (fs::is_directory(runs_dir)) {
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "run.json")) {
        run_dirs.push_back(entry.path().string());
      }
    }
  }
  if (run_dirs.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("no completed runs under ", runs_dir));
  }
  std::sort(run_dirs.begin(), run_dirs.end());

  struct Group {
    std::vector<double> loss;
    std::vector<double> bleu;
    std::vector<double> advantage;
    std::vector<double> leakage;
    int64_t runs = 0;
  };
  std::map<std::tuple<int, double, std::string, std::string>, Group> groups;
  const std::vector<std::string> tables = {"accounting.csv", "bleu.csv",
                                           "mia.csv", "pii.csv"};
  std::map<std::string, std::string> aggregate;

  for (const std::string& dir : run_dirs) {
    auto text = ReadFileToString(Join(dir, "run.json"));
    if (!text.ok()) return text.status();
    nlohmann::json run = nlohmann::json::parse(*text, nullptr, false);
    if (run.is_discarded()) {
      return absl::DataLossError(absl::StrCat(dir, "/run.json: invalid JSON"));
    }
    std::string tag_name;
    std::string eps_text;
    double loss = 0.0;
    try {
      tag_name = run.at("model_tag").get<std::string>();
      eps_text = run.at("epsilon").get<std::string>();
      loss = run.at("train_mean_loss").get<double>();
    } catch (const nlohmann::json::exception& e) {
      return absl::DataLossError(absl::StrCat(dir, "/run.json: ", e.what()));
    }
    auto tag = ParseModelTag(tag_name);
    if (!tag.ok()) return tag.status();
    auto eps = ParseEpsilon(eps_text);
    if (!eps.ok()) return eps.status();
    Group& group = groups[{TagOrder(*tag), -*eps, tag_name, eps_text}];
    ++group.runs;
    group.loss.push_back(loss);

    for (const std::string& table : tables) {
      const std::string path = Join(dir, table);
      if (!fs::exists(path)) continue;
      auto lines = ReadLines(path);
      if (!lines.ok()) return lines.status();
      if (lines->empty()) continue;
      std::string& body = aggregate[table];
      if (body.empty()) body = (*lines)[0] + "\n";
      for (size_t i = 1; i < lines->size(); ++i) body += (*lines)[i] + "\n";
    }
    auto number = [&](const std::string& table, const std::string& column,
                      std::vector<double>& sink) -> absl::Status {
      const std::string path = Join(dir, table);
      if (!fs::exists(path)) return absl::OkStatus();
      auto record = ReadCsvRecord(path);
      if (!record.ok()) return record.status();
      const std::string& value = (*record)[column];
      if (value.empty()) return absl::OkStatus();
      double parsed = 0.0;
      if (!absl::SimpleAtod(value, &parsed)) {
        return absl::DataLossError(
            absl::StrCat(path, ": bad ", column, " '", value, "'"));
      }
      sink.push_back(parsed);
      return absl::OkStatus();
    };
    if (auto s = number("bleu.csv", "bleu_x100", group.bleu); !s.ok()) return s;
    if (auto s = number("mia.csv", "advantage", group.advantage); !s.ok()) {
      return s;
    }
    if (auto s = number("pii.csv", "leakage_pct", group.leakage); !s.ok()) {
      return s;
    }
  }

  for (const auto& [table, body] : aggregate) {
    if (auto s = WriteStringToFile(Join(output_dir, table), body); !s.ok()) {
      return s;
    }
  }

  std::string report = CsvLine(
      {"model_tag", "epsilon", "runs", "train_loss_mean", "train_loss_std",
       "bleu_x100_mean", "bleu_x100_std", "advantage_mean", "advantage_std",
       "leakage_pct_mean", "leakage_pct_std"});
  auto cells = [](const std::vector<double>& values) {
    if (values.empty()) return std::pair<std::string, std::string>{"", ""};
    const Moments m = Summarize(values);
    return std::pair{FormatDouble(m.mean), FormatDouble(m.std)};
  };
  for (const auto& [key, group] : groups) {
    const auto& [order, neg_eps, tag_name, eps_text] = key;
    const auto loss = cells(group.loss);
    const auto bleu = cells(group.bleu);
    const auto advantage = cells(group.advantage);
    const auto leakage = cells(group.leakage);
    report += CsvLine({tag_name, eps_text, absl::StrCat(group.runs),
                       loss.first, loss.second, bleu.first, bleu.second,
                       advantage.first, advantage.second, leakage.first,
                       leakage.second});
  }
  return WriteStringToFile(Join(output_dir, "report.csv"), report);
}

absl::Status RunExperiment(const ExperimentConfig& config,
                           const RunnerOptions& options) {
  if (auto s = CmdPrepare(config, options); !s.ok()) return s;
  const std::string out = OutputDir(config, options);
  auto data = LoadPreparedData(out);
  if (!data.ok()) return data.status();

  std::vector<ModelTag> tags = config.tags;
  const bool wants_augdoc =
      std::find(tags.begin(), tags.end(), ModelTag::kAugdoc) != tags.end();
  if (wants_augdoc && std::find(tags.begin(), tags.end(),
                                ModelTag::kAugdocZeroShot) == tags.end()) {
    tags.push_back(ModelTag::kAugdocZeroShot);
  }
  std::sort(tags.begin(), tags.end(), [](ModelTag a, ModelTag b) {
    return TagOrder(a) < TagOrder(b);
  });

  std::vector<RunKey> keys;
  for (ModelTag tag : tags) {
    const std::vector<double> epsilons =
        tag == ModelTag::kAugdocZeroShot ? std::vector<double>{kInf}
                                         : data->epsilons;
    for (double eps : epsilons) {
      for (uint64_t seed : config.seeds) keys.push_back({tag, eps, seed});
    }
  }
  for (const RunKey& key : keys) {
    auto record = CmdTrain(config, key, options);
    if (!record.ok()) return record.status();
  }
  for (const RunKey& key : keys) {
    auto report = CmdAttack(config, key, options);
    if (!report.ok()) return report.status();
    auto leakage = CmdPiiEval(config, key, options);
    if (!leakage.ok()) return leakage.status();
  }
  return CmdReport(out);
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kOutOfRange:
      return 2;
    case absl::StatusCode::kFailedPrecondition:
      return 3;
    default:
      return 1;
  }
}

}  // namespace dpgran
