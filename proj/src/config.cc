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

#include "dpgran/config.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "dpgran/accountant.h"
#include "dpgran/csv.h"

namespace dpgran {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string Trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && absl::ascii_isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin &&
         absl::ascii_isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

// Cuts a trailing # comment that is not inside a string.
std::string_view StripComment(std::string_view line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool IsBareKey(std::string_view key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return absl::ascii_isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == '.';
  });
}

absl::StatusOr<std::string> Unquote(std::string_view raw) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    return absl::InvalidArgumentError("expected a double-quoted string");
  }
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 2 < raw.size()) {
      const char next = raw[++i];
      switch (next) {
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        default:
          out += next;
      }
    } else {
      out += raw[i];
    }
  }
  return out;
}

absl::StatusOr<double> ParseNumber(std::string_view raw) {
  std::string text = Trim(raw);
  if (text == "inf" || text == "\"inf\"" || text == "+inf") return kInf;
  double value = 0.0;
  if (!absl::SimpleAtod(text, &value) || std::isnan(value)) {
    return absl::InvalidArgumentError(absl::StrCat("not a number: ", text));
  }
  return value;
}

absl::StatusOr<std::vector<std::string>> SplitArray(std::string_view raw) {
  std::string text = Trim(raw);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    return absl::InvalidArgumentError("expected a [ ... ] array");
  }
  std::vector<std::string> items;
  std::string current;
  bool in_string = false;
  for (size_t i = 1; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(Trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  std::string last = Trim(current);
  if (!last.empty()) items.push_back(last);
  for (const std::string& item : items) {
    if (item.empty()) return absl::InvalidArgumentError("empty array element");
  }
  return items;
}

absl::Status WithKey(const absl::Status& status, const std::string& key,
                     int line) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", key, "' (line ", line,
                   "): ", std::string(status.message())));
}

// Reads typed values out of a KeyValueFile, remembering which keys were
// consumed so unknown keys can be reported.
class Reader {
 public:
  explicit Reader(const KeyValueFile& file) : file_(file) {}

  template <typename T, typename Getter>
  absl::Status Read(const std::string& key, T& out, Getter getter) {
    if (!file_.Has(key)) return absl::OkStatus();
    used_.insert(key);
    auto value = (file_.*getter)(key);
    if (!value.ok()) return value.status();
    out = static_cast<T>(*value);
    return absl::OkStatus();
  }

  absl::Status Double(const std::string& key, double& out) {
    return Read(key, out, &KeyValueFile::GetDouble);
  }
  template <typename T>
  absl::Status Int(const std::string& key, T& out) {
    return Read(key, out, &KeyValueFile::GetInt);
  }
  absl::Status Bool(const std::string& key, bool& out) {
    return Read(key, out, &KeyValueFile::GetBool);
  }
  absl::Status String(const std::string& key, std::string& out) {
    return Read(key, out, &KeyValueFile::GetString);
  }

  absl::Status Unused() const {
    for (const std::string& key : file_.Keys()) {
      if (!used_.contains(key)) {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown config key '", key, "'"));
      }
    }
    return absl::OkStatus();
  }

  void MarkUsed(const std::string& key) { used_.insert(key); }

 private:
  const KeyValueFile& file_;
  std::set<std::string> used_;
};

absl::Status ReadTrainSpec(Reader& reader, const std::string& section,
                           TrainSpec& spec) {
  const std::string p = absl::StrCat("train.", section, ".");
  if (auto s = reader.Double(p + "learning_rate", spec.learning_rate); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int(p + "lot_size", spec.lot_size); !s.ok()) return s;
  if (auto s = reader.Double(p + "epochs", spec.epochs); !s.ok()) return s;
  if (auto s = reader.Double(p + "clip_bound", spec.clip_bound); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int(p + "accumulation_chunk", spec.accumulation_chunk);
      !s.ok()) {
    return s;
  }
  if (auto s = reader.Int(p + "num_threads", spec.num_threads); !s.ok()) {
    return s;
  }
  if (!(spec.learning_rate > 0.0) || spec.lot_size < 1 ||
      !(spec.epochs > 0.0) || !(spec.clip_bound > 0.0) ||
      spec.accumulation_chunk < 1 || spec.num_threads < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "[train.", section,
        "] needs positive learning_rate, lot_size, epochs, clip_bound, "
        "accumulation_chunk and num_threads"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<KeyValueFile> KeyValueFile::Parse(std::string_view text) {
  KeyValueFile file;
  std::string section;
  int line_number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line = Trim(StripComment(text.substr(pos, end - pos)));
    pos = end + 1;
    ++line_number;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || !IsBareKey(line.substr(1, line.size() - 2))) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_number, ": malformed section header"));
      }
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected key = value"));
    }
    std::string key = Trim(std::string_view(line).substr(0, eq));
    std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (!IsBareKey(key) || value.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected key = value"));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.contains(full)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": duplicate key '", full, "'"));
    }
    file.values_[full] = Entry{value, line_number};
  }
  return file;
}

std::vector<std::string> KeyValueFile::Keys() const {
  std::vector<std::string> keys;
  for (const auto& [key, entry] : values_) keys.push_back(key);
  return keys;
}

absl::StatusOr<KeyValueFile::Entry> KeyValueFile::Find(
    const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing config key '", key, "'"));
  }
  return it->second;
}

absl::StatusOr<std::string> KeyValueFile::GetString(
    const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  auto value = Unquote(entry->raw);
  if (!value.ok()) return WithKey(value.status(), key, entry->line);
  return value;
}

absl::StatusOr<double> KeyValueFile::GetDouble(const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  auto value = ParseNumber(entry->raw);
  if (!value.ok()) return WithKey(value.status(), key, entry->line);
  return value;
}

absl::StatusOr<int64_t> KeyValueFile::GetInt(const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  int64_t value = 0;
  if (!absl::SimpleAtoi(entry->raw, &value)) {
    return WithKey(absl::InvalidArgumentError("expected an integer"), key,
                   entry->line);
  }
  return value;
}

absl::StatusOr<bool> KeyValueFile::GetBool(const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  if (entry->raw == "true") return true;
  if (entry->raw == "false") return false;
  return WithKey(absl::InvalidArgumentError("expected true or false"), key,
                 entry->line);
}

absl::StatusOr<std::vector<double>> KeyValueFile::GetDoubleList(
    const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  auto items = SplitArray(entry->raw);
  if (!items.ok()) return WithKey(items.status(), key, entry->line);
  std::vector<double> values;
  for (const std::string& item : *items) {
    auto value = ParseNumber(item);
    if (!value.ok()) return WithKey(value.status(), key, entry->line);
    values.push_back(*value);
  }
  return values;
}

absl::StatusOr<std::vector<int64_t>> KeyValueFile::GetIntList(
    const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  auto items = SplitArray(entry->raw);
  if (!items.ok()) return WithKey(items.status(), key, entry->line);
  std::vector<int64_t> values;
  for (const std::string& item : *items) {
    int64_t value = 0;
    if (!absl::SimpleAtoi(item, &value)) {
      return WithKey(absl::InvalidArgumentError(
                         absl::StrCat("not an integer: ", item)),
                     key, entry->line);
    }
    values.push_back(value);
  }
  return values;
}

absl::StatusOr<std::vector<std::string>> KeyValueFile::GetStringList(
    const std::string& key) const {
  auto entry = Find(key);
  if (!entry.ok()) return entry.status();
  auto items = SplitArray(entry->raw);
  if (!items.ok()) return WithKey(items.status(), key, entry->line);
  std::vector<std::string> values;
  for (const std::string& item : *items) {
    auto value = Unquote(item);
    if (!value.ok()) return WithKey(value.status(), key, entry->line);
    values.push_back(*value);
  }
  return values;
}

std::string_view ModelTagName(ModelTag tag) {
  switch (tag) {
    case ModelTag::kSen:
      return "sen";
    case ModelTag::kDoc:
      return "doc";
    case ModelTag::kAugdoc:
      return "augdoc";
    case ModelTag::kAugdocZeroShot:
      return "augdoc_zero_shot";
  }
  return "sen";
}

absl::StatusOr<ModelTag> ParseModelTag(std::string_view name) {
  if (name == "sen") return ModelTag::kSen;
  if (name == "doc") return ModelTag::kDoc;
  if (name == "augdoc") return ModelTag::kAugdoc;
  if (name == "augdoc_zero_shot" || name == "augdoc-zero-shot") {
    return ModelTag::kAugdocZeroShot;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown model tag '", std::string(name),
      "' (expected sen, doc, augdoc or augdoc-zero-shot)"));
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(std::string_view text) {
  auto file = KeyValueFile::Parse(text);
  if (!file.ok()) return file.status();
  Reader reader(*file);
  ExperimentConfig config;

  if (auto s = reader.String("experiment.output_dir", config.output_dir);
      !s.ok()) {
    return s;
  }
  if (file->Has("experiment.seeds")) {
    reader.MarkUsed("experiment.seeds");
    auto seeds = file->GetIntList("experiment.seeds");
    if (!seeds.ok()) return seeds.status();
    config.seeds.clear();
    for (int64_t seed : *seeds) {
      if (seed < 0) return absl::InvalidArgumentError("seeds must be >= 0");
      config.seeds.push_back(static_cast<uint64_t>(seed));
    }
  }
  if (config.seeds.empty()) {
    return absl::InvalidArgumentError("experiment.seeds needs at least one seed");
  }
  if (std::set<uint64_t>(config.seeds.begin(), config.seeds.end()).size() !=
      config.seeds.size()) {
    return absl::InvalidArgumentError("experiment.seeds has duplicates");
  }
  if (auto s = reader.Double("experiment.delta", config.delta); !s.ok()) {
    return s;
  }
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    return absl::InvalidArgumentError("experiment.delta must lie in (0, 1)");
  }
  if (auto s = reader.Double("experiment.epsilon_base", config.epsilon_base);
      !s.ok()) {
    return s;
  }
  if (!(config.epsilon_base > 0.0) || std::isinf(config.epsilon_base)) {
    return absl::InvalidArgumentError(
        "experiment.epsilon_base must be positive and finite");
  }
  if (file->Has("experiment.epsilons")) {
    reader.MarkUsed("experiment.epsilons");
    auto as_string = file->GetString("experiment.epsilons");
    if (as_string.ok()) {
      if (*as_string != "ladder") {
        return absl::InvalidArgumentError(
            "experiment.epsilons must be \"ladder\" or a list");
      }
      config.epsilon_ladder = true;
    } else {
      auto list = file->GetDoubleList("experiment.epsilons");
      if (!list.ok()) return list.status();
      if (list->empty()) {
        return absl::InvalidArgumentError("experiment.epsilons is empty");
      }
      for (double eps : *list) {
        if (!(eps > 0.0)) {
          return absl::InvalidArgumentError(
              "experiment.epsilons entries must be positive or inf");
        }
      }
      config.epsilon_ladder = false;
      config.epsilons = *list;
    }
  }
  if (file->Has("experiment.tags")) {
    reader.MarkUsed("experiment.tags");
    auto names = file->GetStringList("experiment.tags");
    if (!names.ok()) return names.status();
    config.tags.clear();
    for (const std::string& name : *names) {
      auto tag = ParseModelTag(name);
      if (!tag.ok()) return tag.status();
      if (std::find(config.tags.begin(), config.tags.end(), *tag) ==
          config.tags.end()) {
        config.tags.push_back(*tag);
      }
    }
    if (config.tags.empty()) {
      return absl::InvalidArgumentError("experiment.tags is empty");
    }
  }

  std::string source = "synthetic";
  if (auto s = reader.String("corpus.source", source); !s.ok()) return s;
  if (source == "synthetic") {
    config.synthetic = true;
  } else if (source == "path") {
    config.synthetic = false;
  } else {
    return absl::InvalidArgumentError(
        "corpus.source must be \"synthetic\" or \"path\"");
  }
  if (auto s = reader.String("corpus.path", config.corpus_path); !s.ok()) {
    return s;
  }
  if (auto s = reader.String("corpus.ledger", config.ledger_path); !s.ok()) {
    return s;
  }
  if (!config.synthetic && config.corpus_path.empty()) {
    return absl::InvalidArgumentError(
        "corpus.path is required when corpus.source = \"path\"");
  }
  SynthOptions& synth = config.synth;
  if (auto s = reader.Int("corpus.n_dialogues", synth.n_dialogues); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("corpus.turns_min", synth.turns_min); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("corpus.turns_max", synth.turns_max); !s.ok()) {
    return s;
  }
  if (auto s = reader.Double("corpus.pii_density", synth.pii_density); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("corpus.seed", synth.seed); !s.ok()) return s;
  if (auto s = reader.String("corpus.locale", synth.locale); !s.ok()) return s;
  if (auto s = reader.Double("corpus.train_fraction", config.split.train);
      !s.ok()) {
    return s;
  }
  if (auto s = reader.Double("corpus.val_fraction", config.split.val); !s.ok()) {
    return s;
  }
  if (auto s = reader.Double("corpus.test_fraction", config.split.test);
      !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("corpus.split_seed", config.split.seed); !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("corpus.member_seed", config.member_seed); !s.ok()) {
    return s;
  }

  if (auto s = reader.Int("public_corpus.n_dialogues", config.public_dialogues);
      !s.ok()) {
    return s;
  }
  if (auto s =
          reader.Int("public_corpus.token_budget", config.public_token_budget);
      !s.ok()) {
    return s;
  }
  if (auto s = reader.Int("public_corpus.seed", config.public_seed); !s.ok()) {
    return s;
  }
  if (config.public_dialogues < 1 || config.public_token_budget < 1) {
    return absl::InvalidArgumentError(
        "public_corpus.n_dialogues and token_budget must be positive");
  }

  if (auto s = reader.Int("model.dim", config.dim); !s.ok()) return s;
  if (auto s = reader.Int("model.max_decode_len", config.max_decode_len);
      !s.ok()) {
    return s;
  }
  if (auto s = reader.Bool("model.bleu_smoothing", config.bleu_smoothing);
      !s.ok()) {
    return s;
  }
  if (config.dim < 1 || config.max_decode_len < 1) {
    return absl::InvalidArgumentError(
        "model.dim and model.max_decode_len must be positive");
  }

  if (auto s = ReadTrainSpec(reader, "sen", config.sen); !s.ok()) return s;
  if (auto s = ReadTrainSpec(reader, "sen_dp", config.sen_dp); !s.ok()) return s;
  if (auto s = ReadTrainSpec(reader, "doc", config.doc); !s.ok()) return s;
  if (auto s = ReadTrainSpec(reader, "doc_dp", config.doc_dp); !s.ok()) return s;
  if (auto s = ReadTrainSpec(reader, "public", config.public_pretrain); !s.ok()) {
    return s;
  }
  if (auto s = reader.Unused(); !s.ok()) return s;
  return config;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  auto text = ReadFileToString(path);
  if (!text.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot read config ", path, ": ",
                     std::string(text.status().message())));
  }
  auto config = ParseExperimentConfig(*text);
  if (!config.ok()) {
    return absl::Status(config.status().code(),
                        absl::StrCat(path, ": ",
                                     std::string(config.status().message())));
  }
  return config;
}

std::vector<double> EpsilonLadder(double base, int max_utterances) {
  const double scaled = ScaleEpsilonForGranularity(base, max_utterances);
  std::vector<double> ladder = {kInf, scaled * 10.0, scaled, 10.0, 1.0};
  std::vector<double> unique;
  for (double eps : ladder) {
    if (std::find(unique.begin(), unique.end(), eps) == unique.end()) {
      unique.push_back(eps);
    }
  }
  return unique;
}

const TrainSpec& TrainSpecFor(const ExperimentConfig& config, ModelTag tag,
                              bool is_private) {
  switch (tag) {
    case ModelTag::kSen:
      return is_private ? config.sen_dp : config.sen;
    case ModelTag::kDoc:
    case ModelTag::kAugdoc:
      return is_private ? config.doc_dp : config.doc;
    case ModelTag::kAugdocZeroShot:
      return config.public_pretrain;
  }
  return config.sen;
}

}  // namespace dpgran
