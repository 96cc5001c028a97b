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

#include "dpgran/checkpoint.h"

#include <bit>
#include <cstring>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgran/csv.h"
#include "json.hpp"

namespace dpgran {
namespace {

constexpr std::string_view kFormat = "dpgran-checkpoint-v1";

uint64_t ToLittleEndian(uint64_t value) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap64(value);
  }
  return value;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  const Seq2SeqDims& dims = checkpoint.model.dims();
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["source_vocab"] = dims.source_vocab;
  header["target_vocab"] = dims.target_vocab;
  header["dim"] = dims.dim;
  header["source_fingerprint"] = checkpoint.source_fingerprint;
  header["target_fingerprint"] = checkpoint.target_fingerprint;
  header["num_parameters"] = dims.NumParameters();
  std::string out = header.dump();
  out += '\n';
  const size_t offset = out.size();
  std::span<const double> params = checkpoint.model.params();
  out.resize(offset + params.size() * sizeof(uint64_t));
  for (size_t i = 0; i < params.size(); ++i) {
    const uint64_t bits = ToLittleEndian(std::bit_cast<uint64_t>(params[i]));
    std::memcpy(out.data() + offset + i * sizeof(uint64_t), &bits,
                sizeof(bits));
  }
  return out;
}

absl::StatusOr<Checkpoint> DeserializeCheckpoint(std::string_view bytes) {
  const size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) {
    return absl::DataLossError("checkpoint has no header line");
  }
  nlohmann::json header =
      nlohmann::json::parse(bytes.substr(0, newline), nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("format", "") != kFormat) {
    return absl::DataLossError("checkpoint header is not recognized");
  }
  Checkpoint checkpoint;
  Seq2SeqDims dims;
  size_t count = 0;
  try {
    dims.source_vocab = header.at("source_vocab").get<int>();
    dims.target_vocab = header.at("target_vocab").get<int>();
    dims.dim = header.at("dim").get<int>();
    checkpoint.source_fingerprint =
        header.at("source_fingerprint").get<uint64_t>();
    checkpoint.target_fingerprint =
        header.at("target_fingerprint").get<uint64_t>();
    count = header.at("num_parameters").get<size_t>();
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("checkpoint header: ", e.what()));
  }
  if (absl::Status s = ValidateDims(dims); !s.ok()) return s;
  if (count != dims.NumParameters()) {
    return absl::DataLossError("checkpoint parameter count mismatch");
  }
  std::string_view payload = bytes.substr(newline + 1);
  if (payload.size() != count * sizeof(uint64_t)) {
    return absl::DataLossError(absl::StrCat(
        "checkpoint payload has ", payload.size(), " bytes, expected ",
        count * sizeof(uint64_t)));
  }
  std::vector<double> params(count);
  for (size_t i = 0; i < count; ++i) {
    uint64_t bits = 0;
    std::memcpy(&bits, payload.data() + i * sizeof(uint64_t), sizeof(bits));
    params[i] = std::bit_cast<double>(ToLittleEndian(bits));
  }
  auto model = TinySeq2Seq::Create(dims, std::move(params));
  if (!model.ok()) return model.status();
  checkpoint.model = *std::move(model);
  return checkpoint;
}

absl::Status SaveCheckpoint(const std::string& path,
                            const Checkpoint& checkpoint) {
  return WriteStringToFile(path, SerializeCheckpoint(checkpoint));
}

absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path) {
  auto bytes = ReadFileToString(path);
  if (!bytes.ok()) return bytes.status();
  auto checkpoint = DeserializeCheckpoint(*bytes);
  if (!checkpoint.ok()) {
    return absl::Status(checkpoint.status().code(),
                        absl::StrCat(path, ": ", checkpoint.status().message()));
  }
  return checkpoint;
}

absl::Status CheckVocabulary(const Checkpoint& checkpoint,
                             const VocabPair& vocab) {
  if (checkpoint.source_fingerprint != vocab.source.Fingerprint() ||
      checkpoint.target_fingerprint != vocab.target.Fingerprint() ||
      checkpoint.model.dims().source_vocab != vocab.source.size() ||
      checkpoint.model.dims().target_vocab != vocab.target.size()) {
    return absl::FailedPreconditionError(
        "checkpoint was trained on a different vocabulary");
  }
  return absl::OkStatus();
}

}  // namespace dpgran
