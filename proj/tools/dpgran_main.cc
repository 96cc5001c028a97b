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

// dpgran: sentence- vs document-level DP-SGD translation experiments.

#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "dpgran/config.h"
#include "dpgran/experiment.h"

namespace {

using dpgran::ExperimentConfig;
using dpgran::RunKey;
using dpgran::RunnerOptions;

struct Flags {
  std::string config;
  std::string out;
  std::string tag = "sen";
  std::string epsilon = "inf";
  uint64_t seed = 0;
  bool overwrite = false;
  bool quiet = false;
};

absl::StatusOr<double> ParseEpsilonFlag(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  if (!absl::SimpleAtod(text, &value) || !(value > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "--epsilon must be inf or a positive number, got '", text, "'"));
  }
  return value;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const Flags& flags) {
  if (flags.config.empty()) {
    return absl::InvalidArgumentError("--config is required");
  }
  return dpgran::LoadExperimentConfig(flags.config);
}

absl::StatusOr<RunKey> KeyFromFlags(const Flags& flags) {
  auto tag = dpgran::ParseModelTag(flags.tag);
  if (!tag.ok()) return tag.status();
  auto epsilon = ParseEpsilonFlag(flags.epsilon);
  if (!epsilon.ok()) return epsilon.status();
  return RunKey{*tag, *epsilon, flags.seed};
}

RunnerOptions OptionsFromFlags(const Flags& flags) {
  RunnerOptions options;
  options.output_dir = flags.out;
  options.overwrite = flags.overwrite;
  if (!flags.quiet) {
    options.log = [](std::string_view message) {
      std::cerr << message << "\n";
    };
  }
  return options;
}

absl::Status Dispatch(const std::string& command, const Flags& flags) {
  if (command == "report") {
    std::string out = flags.out;
    if (out.empty()) {
      auto config = LoadConfig(flags);
      if (!config.ok()) return config.status();
      out = config->output_dir;
    }
    return dpgran::CmdReport(out);
  }
  auto config = LoadConfig(flags);
  if (!config.ok()) return config.status();
  const RunnerOptions options = OptionsFromFlags(flags);
  if (command == "prepare") return dpgran::CmdPrepare(*config, options);
  if (command == "run") return dpgran::RunExperiment(*config, options);

  auto key = KeyFromFlags(flags);
  if (!key.ok()) return key.status();
  if (command == "train") {
    return dpgran::CmdTrain(*config, *key, options).status();
  }
  if (command == "attack") {
    auto report = dpgran::CmdAttack(*config, *key, options);
    if (!report.ok()) return report.status();
    std::cout << dpgran::MiaCsvHeader()
              << dpgran::MiaCsvRow(dpgran::RunId(*key),
                                   std::string(dpgran::ModelTagName(key->tag)),
                                   key->epsilon, *report);
    return absl::OkStatus();
  }
  if (command == "pii-eval") {
    auto report = dpgran::CmdPiiEval(*config, *key, options);
    if (!report.ok()) return report.status();
    std::cout << dpgran::LeakageCsvHeader()
              << dpgran::LeakageCsvRow(
                     dpgran::RunId(*key),
                     std::string(dpgran::ModelTagName(key->tag)), key->epsilon,
                     *report);
    return absl::OkStatus();
  }
  if (command == "account") {
    auto text = dpgran::CmdAccount(*config, *key, options);
    if (!text.ok()) return text.status();
    std::cout << *text;
    return absl::OkStatus();
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown command ", command));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence- and document-level DP-SGD translation experiments"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub, bool run_flags) {
    sub->add_option("--config", flags.config, "Experiment config file");
    sub->add_option("--out", flags.out, "Output directory (overrides config)");
    sub->add_flag("--quiet", flags.quiet, "No progress messages");
    if (run_flags) {
      sub->add_option("--tag", flags.tag,
                      "sen | doc | augdoc | augdoc-zero-shot");
      sub->add_option("--epsilon", flags.epsilon, "inf or a positive number");
      sub->add_option("--seed", flags.seed, "Run seed");
    }
  };
  CLI::App* prepare = app.add_subcommand("prepare", "Build unit files and splits");
  add_common(prepare, false);
  CLI::App* train = app.add_subcommand("train", "Train one configuration");
  add_common(train, true);
  train->add_flag("--overwrite", flags.overwrite, "Replace an existing run");
  CLI::App* attack = app.add_subcommand("attack", "Membership inference");
  add_common(attack, true);
  CLI::App* pii = app.add_subcommand("pii-eval", "PII leakage of true positives");
  add_common(pii, true);
  CLI::App* account = app.add_subcommand("account", "Noise calibration only");
  add_common(account, true);
  CLI::App* report = app.add_subcommand("report", "Aggregate all runs");
  add_common(report, false);
  CLI::App* run = app.add_subcommand("run", "Prepare, train, attack, report");
  add_common(run, false);
  run->add_flag("--overwrite", flags.overwrite, "Replace existing runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const absl::Status status = Dispatch(command, flags);
  if (!status.ok()) {
    std::cerr << "dpgran " << command << ": " << status.message() << "\n";
  }
  return dpgran::ExitCodeFor(status);
}
