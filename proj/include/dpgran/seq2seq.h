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

#ifndef DPGRAN_SEQ2SEQ_H_
#define DPGRAN_SEQ2SEQ_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgran/dpsgd.h"
#include "dpgran/vocab.h"

namespace dpgran {

// Shape of a TinySeq2Seq. The flat parameter vector is laid out as
//   [E_src (V_s x d) | E_tgt (V_t x d) | W (d x V_t) | b (V_t)]
// with every block row-major.
struct Seq2SeqDims {
  int source_vocab = 0;
  int target_vocab = 0;
  int dim = 0;

  size_t NumParameters() const;
  size_t target_embedding_offset() const;
  size_t projection_offset() const;
  size_t bias_offset() const;
};

absl::Status ValidateDims(const Seq2SeqDims& dims);

// Checks every id against the vocab sizes and that the target is non-empty.
absl::Status ValidateIds(const Seq2SeqDims& dims, std::span<const int> source,
                         std::span<const int> target);

// The encoder state is the mean of the source embeddings; position t decodes
// logits W^T (h + E_tgt[y_{t-1}]) + b with y_0 = <bos>. Returns the mean
// cross-entropy over target positions. When `grad` is non-empty it is
// overwritten with the exact gradient. Ids are not checked.
double Seq2SeqLossKernel(const Seq2SeqDims& dims, std::span<const double> params,
                         std::span<const int> source, std::span<const int> target,
                         std::span<double> grad);

class TinySeq2Seq {
 public:
  static absl::StatusOr<TinySeq2Seq> Create(const Seq2SeqDims& dims,
                                            std::vector<double> params);
  static TinySeq2Seq Zero(const Seq2SeqDims& dims);
  // Every parameter uniform in (-0.1, 0.1).
  static TinySeq2Seq RandomInit(const Seq2SeqDims& dims, uint64_t seed);

  const Seq2SeqDims& dims() const { return dims_; }
  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  absl::StatusOr<double> Loss(std::span<const int> source,
                              std::span<const int> target) const;
  absl::StatusOr<std::vector<double>> Gradient(std::span<const int> source,
                                               std::span<const int> target) const;

  // Argmax decoding from <bos>; stops after emitting <eos> or max_len tokens.
  // Ties go to the lowest id.
  std::vector<int> GreedyDecode(std::span<const int> source, int max_len) const;

 private:
  TinySeq2Seq(Seq2SeqDims dims, std::vector<double> params)
      : dims_(dims), params_(std::move(params)) {}

  Seq2SeqDims dims_;
  std::vector<double> params_;
};

struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;  // ends with <eos>
};

EncodedPair EncodePair(const VocabPair& vocab, std::string_view source,
                       std::string_view target);

class Seq2SeqObjective : public DifferentiableObjective {
 public:
  static absl::StatusOr<Seq2SeqObjective> Create(const Seq2SeqDims& dims,
                                                 std::vector<EncodedPair> pairs);

  size_t NumParameters() const override { return dims_.NumParameters(); }
  size_t NumExamples() const override { return pairs_.size(); }
  double Loss(std::span<const double> params, size_t example) const override;
  double LossAndGradient(std::span<const double> params, size_t example,
                         std::span<double> grad) const override;

 private:
  Seq2SeqObjective(Seq2SeqDims dims, std::vector<EncodedPair> pairs)
      : dims_(dims), pairs_(std::move(pairs)) {}

  Seq2SeqDims dims_;
  std::vector<EncodedPair> pairs_;
};

// A model together with its vocabularies, scoring and translating raw text.
// Holds references; both arguments must outlive it.
class Seq2SeqTranslator {
 public:
  Seq2SeqTranslator(const TinySeq2Seq& model, const VocabPair& vocab)
      : model_(model), vocab_(vocab) {}

  double PairLoss(std::string_view source, std::string_view target) const;
  std::string Translate(std::string_view source, int max_len) const;

 private:
  const TinySeq2Seq& model_;
  const VocabPair& vocab_;
};

}  // namespace dpgran

#endif  // DPGRAN_SEQ2SEQ_H_
