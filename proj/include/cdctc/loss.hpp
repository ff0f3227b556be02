// cdctc/loss.hpp

// Copyright 2026  The cdctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "cdctc/alphabet.hpp"
#include "cdctc/forward_backward.hpp"
#include "cdctc/graph.hpp"

namespace cdctc {

enum class LossKind {
  kCtc,    // frame-normalized
  kCtcG,   // sequence-normalized over valid strings
  kCtcGB,  // sequence-normalized with context-dependent blanks
};

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);

template <typename Scalar>
struct LossResult {
  Scalar nll = 0;
  // d nll / d log O_{t,l}
  ScoreMatrix<Scalar> grad;
};

namespace internal {

template <typename Scalar>
void check_scores(const ScoreMatrix<Scalar>& scores, const CdAlphabet& alphabet) {
  if (scores.cols() != alphabet.size())
    throw Error("loss: score matrix width " + std::to_string(scores.cols()) +
                " does not match alphabet size " + std::to_string(alphabet.size()));
  if (!scores.allFinite()) throw Error("loss: non-finite score");
}

}  // namespace internal

// Row-wise log-softmax over the usable symbols; unusable columns get -inf.
template <typename Scalar>
ScoreMatrix<Scalar> log_softmax_usable(const ScoreMatrix<Scalar>& scores,
                                       const CdAlphabet& alphabet) {
  ScoreMatrix<Scalar> out =
      ScoreMatrix<Scalar>::Constant(scores.rows(), scores.cols(), kLogZero<Scalar>);
  const auto usable = alphabet.usable_ids();
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Scalar m = kLogZero<Scalar>;
    for (int id : usable) m = std::max(m, scores(t, id));
    Scalar z = 0;
    for (int id : usable) z += std::exp(scores(t, id) - m);
    const Scalar log_z = m + std::log(z);
    for (int id : usable) out(t, id) = scores(t, id) - log_z;
  }
  return out;
}

// Frame-normalized CTC given the relaxed numerator trellis.
template <typename Scalar>
LossResult<Scalar> ctc_local(const ScoreMatrix<Scalar>& scores,
                             const Trellis& numerator,
                             const CdAlphabet& alphabet) {
  internal::check_scores(scores, alphabet);
  const ScoreMatrix<Scalar> log_probs = log_softmax_usable(scores, alphabet);
  const ForwardBackward<Scalar> num = forward_backward(numerator, log_probs);
  LossResult<Scalar> out;
  out.nll = -num.total;
  out.grad = ScoreMatrix<Scalar>::Zero(scores.rows(), scores.cols());
  for (int id : alphabet.usable_ids())
    out.grad.col(id) = log_probs.col(id).array().exp() - num.occupancy.col(id).array();
  return out;
}

// -log sum_{B^-1(Y_E)} prod_t p(y_t | X) with p the per-frame softmax and Y_E
// the context expansion of the transcript. The per-frame normalizer spreads
// mass over every string of CD symbols, invalid overlaps included.
template <typename Scalar>
LossResult<Scalar> ctc_local(const ScoreMatrix<Scalar>& scores,
                             std::span<const int> transcript,
                             const CdAlphabet& alphabet) {
  const Trellis numerator =
      unroll(numerator_graph(transcript, alphabet, NumeratorKind::kRelaxed),
             static_cast<int>(scores.rows()));
  return ctc_local(scores, numerator, alphabet);
}

// Sequence-normalized CTC given the valid numerator trellis.
template <typename Scalar>
LossResult<Scalar> ctc_global(const ScoreMatrix<Scalar>& scores,
                              const Trellis& numerator, const Fst& den_graph,
                              const CdAlphabet& alphabet,
                              std::size_t materialize_limit = 4096) {
  internal::check_scores(scores, alphabet);
  const ForwardBackward<Scalar> num = forward_backward(numerator, scores);
  const ForwardBackward<Scalar> den =
      graph_forward_backward(den_graph, scores, materialize_limit);
  LossResult<Scalar> out;
  out.nll = den.total - num.total;
  out.grad = den.occupancy - num.occupancy;
  return out;
}

// log sum_{valid strings} S - log sum_{valid strings in B^-1(Y)} S.
template <typename Scalar>
LossResult<Scalar> ctc_global(const ScoreMatrix<Scalar>& scores,
                              std::span<const int> transcript,
                              const CdAlphabet& alphabet, const Fst& den_graph) {
  const Trellis numerator =
      unroll(numerator_graph(transcript, alphabet, NumeratorKind::kValid),
             static_cast<int>(scores.rows()));
  return ctc_global(scores, numerator, den_graph, alphabet);
}

template <typename Scalar>
LossResult<Scalar> ctc_global_blank(const ScoreMatrix<Scalar>& scores,
                                    std::span<const int> transcript,
                                    const CdAlphabet& alphabet,
                                    const Fst& den_graph) {
  if (alphabet.blank_mode() != BlankMode::kContextDependent)
    throw Error("ctc_global_blank: CD-blank alphabet required");
  return ctc_global(scores, transcript, alphabet, den_graph);
}

// Numerator graph flavour used by each criterion.
inline NumeratorKind numerator_kind(LossKind kind) {
  return kind == LossKind::kCtc ? NumeratorKind::kRelaxed : NumeratorKind::kValid;
}

// Loss against a precomputed numerator trellis; the denominator graph is
// ignored for the frame-normalized criterion.
template <typename Scalar>
LossResult<Scalar> sequence_loss(LossKind kind, const ScoreMatrix<Scalar>& scores,
                                 const Trellis& numerator, const Fst& den_graph,
                                 const CdAlphabet& alphabet) {
  if (kind == LossKind::kCtc) return ctc_local(scores, numerator, alphabet);
  if (kind == LossKind::kCtcGB &&
      alphabet.blank_mode() != BlankMode::kContextDependent)
    throw Error("ctc-gb: CD-blank alphabet required");
  return ctc_global(scores, numerator, den_graph, alphabet);
}

}  // namespace cdctc
