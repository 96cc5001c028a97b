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

#ifndef DPGRAN_EXPERIMENT_H_
#define DPGRAN_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/accountant.h"
#include "dpgran/attack.h"
#include "dpgran/config.h"
#include "dpgran/corpus.h"
#include "dpgran/pii.h"
#include "dpgran/vocab.h"

namespace dpgran {

// Everything the training and evaluation stages read from <out>/data.
struct PreparedData {
  std::vector<Utterance> utterances;
  std::vector<PiiLedgerEntry> ledger;
  std::vector<ParallelUnit> train_sentences;
  std::vector<ParallelUnit> train_documents;
  std::vector<ParallelUnit> test_sentences;
  std::vector<ParallelUnit> test_documents;
  // Validation and test sentence units.
  std::vector<ParallelUnit> nonmembers;
  // Training sentence units sampled once per experiment, as many as there
  // are nonmembers.
  std::vector<ParallelUnit> members;
  std::vector<ParallelUnit> public_documents;
  VocabPair vocab;
  int max_utterances = 0;
  std::vector<double> epsilons;
};

struct RunnerOptions {
  std::string output_dir;
  bool overwrite = false;
  // Progress messages; may be empty.
  std::function<void(std::string_view)> log;
};

// Output directory from the options, falling back to the config.
std::string OutputDir(const ExperimentConfig& config,
                      const RunnerOptions& options);

// Builds the corpus, splits it, and writes <out>/data: utterances, ledger,
// sentence and document unit files, split manifests, member ids, public
// documents, vocabularies and a manifest. Byte-identical on rerun.
absl::Status CmdPrepare(const ExperimentConfig& config,
                        const RunnerOptions& options);

// Fails with FailedPrecondition when `prepare` has not run.
absl::StatusOr<PreparedData> LoadPreparedData(const std::string& output_dir);

struct RunKey {
  ModelTag tag = ModelTag::kSen;
  double epsilon = 0.0;
  uint64_t seed = 0;
};

// "<tag>-eps<epsilon>-seed<seed>", e.g. "sen-epsinf-seed0".
std::string RunId(const RunKey& key);
std::string RunDir(const std::string& output_dir, const RunKey& key);

struct RunRecord {
  RunKey key;
  std::string run_id;
  std::string dir;
  MechanismParams mechanism;
  double clip_bound = 0.0;
  // Unset for non-private runs.
  std::optional<PrivacyParams> privacy;
  // Mean per-unit loss over the units the model was trained on.
  double train_mean_loss = 0.0;
  double bleu = 0.0;
};

// Trains one configuration and writes checkpoint.bin, loss_history.csv,
// accounting.csv, bleu.csv and run.json into its run directory.
absl::StatusOr<RunRecord> CmdTrain(const ExperimentConfig& config,
                                   const RunKey& key,
                                   const RunnerOptions& options);

// The shared loss threshold: read from <out>/tau.json or computed from the
// non-private sentence run of the first seed.
absl::StatusOr<Threshold> LoadOrComputeTau(const ExperimentConfig& config,
                                           const RunnerOptions& options);

// Attacks a trained run and writes mia.csv and true_positives.jsonl.
absl::StatusOr<MiaReport> CmdAttack(const ExperimentConfig& config,
                                    const RunKey& key,
                                    const RunnerOptions& options);

// PII leakage over an attacked run's true positives; writes pii.csv and
// spans.jsonl.
absl::StatusOr<LeakageReport> CmdPiiEval(const ExperimentConfig& config,
                                         const RunKey& key,
                                         const RunnerOptions& options);

// Calibrated noise and accounting for a configuration without training it,
// as CSV text. Uses the prepared data for dataset sizes.
absl::StatusOr<std::string> CmdAccount(const ExperimentConfig& config,
                                       const RunKey& key,
                                       const RunnerOptions& options);

// Collects every run under <out>/runs into <out>/accounting.csv,
// <out>/bleu.csv, <out>/mia.csv, <out>/pii.csv and the per-(tag, epsilon)
// summary <out>/report.csv.
absl::Status CmdReport(const std::string& output_dir);

// Epsilons of the experiment grid, from the config or the ladder.
std::vector<double> ResolveEpsilons(const ExperimentConfig& config,
                                    int max_utterances);

// The full grid: prepare, every train, every attack and PII evaluation, and
// the report.
absl::Status RunExperiment(const ExperimentConfig& config,
                           const RunnerOptions& options);

// CLI exit code for a status: 0 ok, 2 config error, 3 missing prerequisite,
// 1 otherwise.
int ExitCodeFor(const absl::Status& status);

}  // namespace dpgran

#endif  // DPGRAN_EXPERIMENT_H_
