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

#include "dpgran/seq2seq.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpgran {

size_t Seq2SeqDims::NumParameters() const {
  return bias_offset() + static_cast<size_t>(target_vocab);
}

size_t Seq2SeqDims::target_embedding_offset() const {
  return static_cast<size_t>(source_vocab) * dim;
}

size_t Seq2SeqDims::projection_offset() const {
  return target_embedding_offset() + static_cast<size_t>(target_vocab) * dim;
}

size_t Seq2SeqDims::bias_offset() const {
  return projection_offset() + static_cast<size_t>(dim) * target_vocab;
}

absl::Status ValidateDims(const Seq2SeqDims& dims) {
  if (dims.source_vocab < 1 || dims.target_vocab < 1 || dims.dim < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "seq2seq dims must be positive, got V_s=", dims.source_vocab,
        " V_t=", dims.target_vocab, " d=", dims.dim));
  }
  return absl::OkStatus();
}

absl::Status ValidateIds(const Seq2SeqDims& dims, std::span<const int> source,
                         std::span<const int> target) {
  if (target.empty()) {
    return absl::InvalidArgumentError("target sequence must not be empty");
  }
  for (int id : source) {
    if (id < 0 || id >= dims.source_vocab) {
      return absl::OutOfRangeError(absl::StrCat(
          "source id ", id, " outside vocabulary of ", dims.source_vocab));
    }
  }
  for (int id : target) {
    if (id < 0 || id >= dims.target_vocab) {
      return absl::OutOfRangeError(absl::StrCat(
          "target id ", id, " outside vocabulary of ", dims.target_vocab));
    }
  }
  if (dims.target_vocab <= kBosId) {
    return absl::InvalidArgumentError("target vocabulary lacks <bos>");
  }
  return absl::OkStatus();
}

double Seq2SeqLossKernel(const Seq2SeqDims& dims, std::span<const double> params,
                         std::span<const int> source, std::span<const int> target,
                         std::span<double> grad) {
  const size_t d = static_cast<size_t>(dims.dim);
  const size_t vt = static_cast<size_t>(dims.target_vocab);
  const double* e_src = params.data();
  const double* e_tgt = params.data() + dims.target_embedding_offset();
  const double* w = params.data() + dims.projection_offset();
  const double* b = params.data() + dims.bias_offset();
  const bool want_grad = !grad.empty();

  std::vector<double> h(d, 0.0);
  for (int x : source) {
    const double* row = e_src + static_cast<size_t>(x) * d;
    for (size_t k = 0; k < d; ++k) h[k] += row[k];
  }
  const double inv_n = source.empty() ? 0.0 : 1.0 / source.size();
  for (double& v : h) v *= inv_n;

  double* g_tgt = nullptr;
  double* g_w = nullptr;
  double* g_b = nullptr;
  std::vector<double> dh;
  if (want_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    g_tgt = grad.data() + dims.target_embedding_offset();
    g_w = grad.data() + dims.projection_offset();
    g_b = grad.data() + dims.bias_offset();
    dh.assign(d, 0.0);
  }

  const double inv_t = 1.0 / static_cast<double>(target.size());
  std::vector<double> u(d);
  std::vector<double> z(vt);
  double loss = 0.0;
  int prev = kBosId;
  for (int gold : target) {
    const double* prev_row = e_tgt + static_cast<size_t>(prev) * d;
    for (size_t k = 0; k < d; ++k) u[k] = h[k] + prev_row[k];
    std::copy(b, b + vt, z.begin());
    for (size_t k = 0; k < d; ++k) {
      const double uk = u[k];
      const double* w_row = w + k * vt;
      for (size_t y = 0; y < vt; ++y) z[y] += uk * w_row[y];
    }
    const double max_z = *std::max_element(z.begin(), z.end());
    const double z_gold = z[gold];
    double sum = 0.0;
    for (size_t y = 0; y < vt; ++y) {
      z[y] = std::exp(z[y] - max_z);
      sum += z[y];
    }
    loss += max_z + std::log(sum) - z_gold;

    if (want_grad) {
      // z becomes dL/dz = (softmax - onehot) / T.
      const double scale = inv_t / sum;
      for (size_t y = 0; y < vt; ++y) z[y] *= scale;
      z[gold] -= inv_t;
      for (size_t y = 0; y < vt; ++y) g_b[y] += z[y];
      double* g_prev = g_tgt + static_cast<size_t>(prev) * d;
      for (size_t k = 0; k < d; ++k) {
        const double* w_row = w + k * vt;
        double* g_w_row = g_w + k * vt;
        const double uk = u[k];
        double du = 0.0;
        for (size_t y = 0; y < vt; ++y) {
          g_w_row[y] += uk * z[y];
          du += w_row[y] * z[y];
        }
        g_prev[k] += du;
        dh[k] += du;
      }
    }
    prev = gold;
  }

  if (want_grad) {
    for (int x : source) {
      double* row = grad.data() + static_cast<size_t>(x) * d;
      for (size_t k = 0; k < d; ++k) row[k] += dh[k] * inv_n;
    }
  }
  return loss * inv_t;
}

absl::StatusOr<TinySeq2Seq> TinySeq2Seq::Create(const Seq2SeqDims& dims,
                                                std::vector<double> params) {
  if (absl::Status status = ValidateDims(dims); !status.ok()) return status;
  if (params.size() != dims.NumParameters()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", dims.NumParameters(), " parameters, got ",
                     params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(params[i])) {
      return absl::InvalidArgumentError(absl::StrCat("parameter ", i, " is not finite"));
    }
  }
  return TinySeq2Seq(dims, std::move(params));
}

TinySeq2Seq TinySeq2Seq::Zero(const Seq2SeqDims& dims) {
  return TinySeq2Seq(dims, std::vector<double>(dims.NumParameters(), 0.0));
}

TinySeq2Seq TinySeq2Seq::RandomInit(const Seq2SeqDims& dims, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  std::vector<double> params(dims.NumParameters());
  for (double& p : params) p = uniform(rng);
  return TinySeq2Seq(dims, std::move(params));
}

absl::StatusOr<double> TinySeq2Seq::Loss(std::span<const int> source,
                                         std::span<const int> target) const {
  if (absl::Status status = ValidateIds(dims_, source, target); !status.ok()) {
    return status;
  }
  return Seq2SeqLossKernel(dims_, params_, source, target, {});
}

absl::StatusOr<std::vector<double>> TinySeq2Seq::Gradient(
    std::span<const int> source, std::span<const int> target) const {
  if (absl::Status status = ValidateIds(dims_, source, target); !status.ok()) {
    return status;
  }
  std::vector<double> grad(params_.size());
  Seq2SeqLossKernel(dims_, params_, source, target, grad);
  return grad;
}

std::vector<int> TinySeq2Seq::GreedyDecode(std::span<const int> source,
                                           int max_len) const {
  const size_t d = static_cast<size_t>(dims_.dim);
  const size_t vt = static_cast<size_t>(dims_.target_vocab);
  const double* e_src = params_.data();
  const double* e_tgt = params_.data() + dims_.target_embedding_offset();
  const double* w = params_.data() + dims_.projection_offset();
  const double* b = params_.data() + dims_.bias_offset();

  std::vector<double> h(d, 0.0);
  for (int x : source) {
    if (x < 0 || x >= dims_.source_vocab) continue;
    for (size_t k = 0; k < d; ++k) h[k] += e_src[static_cast<size_t>(x) * d + k];
  }
  if (!source.empty()) {
    for (double& v : h) v /= static_cast<double>(source.size());
  }

  std::vector<int> output;
  std::vector<double> u(d);
  std::vector<double> z(vt);
  int prev = kBosId;
  for (int t = 0; t < max_len; ++t) {
    for (size_t k = 0; k < d; ++k) {
      u[k] = h[k] + e_tgt[static_cast<size_t>(prev) * d + k];
    }
    std::copy(b, b + vt, z.begin());
    for (size_t k = 0; k < d; ++k) {
      for (size_t y = 0; y < vt; ++y) z[y] += u[k] * w[k * vt + y];
    }
    // max_element returns the first maximum, i.e. the lowest id on ties.
    const int next =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    output.push_back(next);
    if (next == kEosId) break;
    prev = next;
  }
  return output;
}

EncodedPair EncodePair(const VocabPair& vocab, std::string_view source,
                       std::string_view target) {
  EncodedPair pair;
  pair.source = vocab.source.Encode(source);
  pair.target = vocab.target.Encode(target);
  pair.target.push_back(kEosId);
  return pair;
}

absl::StatusOr<Seq2SeqObjective> Seq2SeqObjective::Create(
    const Seq2SeqDims& dims, std::vector<EncodedPair> pairs) {
  if (absl::Status status = ValidateDims(dims); !status.ok()) return status;
  for (size_t i = 0; i < pairs.size(); ++i) {
    absl::Status status = ValidateIds(dims, pairs[i].source, pairs[i].target);
    if (!status.ok()) {
      return absl::Status(status.code(), absl::StrCat("pair ", i, ": ",
                                                      status.message()));
    }
  }
  return Seq2SeqObjective(dims, std::move(pairs));
}

double Seq2SeqObjective::Loss(std::span<const double> params,
                              size_t example) const {
  const EncodedPair& pair = pairs_[example];
  return Seq2SeqLossKernel(dims_, params, pair.source, pair.target, {});
}

double Seq2SeqObjective::LossAndGradient(std::span<const double> params,
                                         size_t example,
                                         std::span<double> grad) const {
  const EncodedPair& pair = pairs_[example];
  return Seq2SeqLossKernel(dims_, params, pair.source, pair.target, grad);
}

double Seq2SeqTranslator::PairLoss(std::string_view source,
                                   std::string_view target) const {
  const EncodedPair pair = EncodePair(vocab_, source, target);
  return Seq2SeqLossKernel(model_.dims(), model_.params(), pair.source,
                           pair.target, {});
}

std::string Seq2SeqTranslator::Translate(std::string_view source,
                                         int max_len) const {
  return vocab_.target.Decode(
      model_.GreedyDecode(vocab_.source.Encode(source), max_len));
}

}  // namespace dpgran
