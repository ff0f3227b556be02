// cdctc/forward_backward.hpp

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

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cdctc/common.hpp"
#include "cdctc/fst.hpp"
#include "cdctc/graph.hpp"

namespace cdctc {

// T x |alphabet| per-frame log-scores log O_{t,l}.
template <typename Scalar>
using ScoreMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T x |alphabet| posterior label occupancies; the derivative of the total
// log-score with respect to the log-scores.
template <typename Scalar>
using Occupancy = ScoreMatrix<Scalar>;

// Per-step, per-trellis-node log scores (alpha or beta).
template <typename Scalar>
using NodeScores = std::vector<std::vector<Scalar>>;

template <typename Scalar>
struct ForwardBackward {
  Scalar total = kLogZero<Scalar>;
  Occupancy<Scalar> occupancy;
  // Frames whose state activations were held in memory at once.
  std::size_t stored_frames = 0;
};

namespace internal {

template <typename Derived>
void check_dims(int num_frames, const Eigen::MatrixBase<Derived>& scores) {
  if (scores.rows() != num_frames)
    throw Error("forward-backward: score matrix has " +
                std::to_string(scores.rows()) + " rows, expected " +
                std::to_string(num_frames));
}

}  // namespace internal

template <typename Scalar>
NodeScores<Scalar> log_forward_table(const Trellis& trellis,
                                     const ScoreMatrix<Scalar>& scores) {
  internal::check_dims(trellis.num_frames, scores);
  NodeScores<Scalar> alpha(trellis.num_frames + 1);
  alpha[0].assign(trellis.nodes[0].size(), Scalar(0));
  for (int t = 1; t <= trellis.num_frames; ++t) {
    alpha[t].assign(trellis.nodes[t].size(), kLogZero<Scalar>);
    for (const TrellisArc& a : trellis.arcs[t]) {
      const Scalar v = alpha[t - 1][a.src] + static_cast<Scalar>(a.weight) +
                       scores(t - 1, a.ilabel);
      alpha[t][a.dst] = log_add(alpha[t][a.dst], v);
    }
  }
  return alpha;
}

// log sum over accepting paths of prod_t O_{t, label_t}.
template <typename Scalar>
Scalar log_forward(const Trellis& trellis, const ScoreMatrix<Scalar>& scores) {
  const NodeScores<Scalar> alpha = log_forward_table(trellis, scores);
  Scalar total = kLogZero<Scalar>;
  const auto& last = alpha[trellis.num_frames];
  for (std::size_t k = 0; k < last.size(); ++k)
    total = log_add(total, last[k] + static_cast<Scalar>(trellis.final_weights[k]));
  return total;
}

template <typename Scalar>
NodeScores<Scalar> log_backward(const Trellis& trellis,
                                const ScoreMatrix<Scalar>& scores) {
  internal::check_dims(trellis.num_frames, scores);
  const int T = trellis.num_frames;
  NodeScores<Scalar> beta(T + 1);
  beta[T].resize(trellis.nodes[T].size());
  for (std::size_t k = 0; k < beta[T].size(); ++k)
    beta[T][k] = static_cast<Scalar>(trellis.final_weights[k]);
  for (int t = T; t >= 1; --t) {
    beta[t - 1].assign(trellis.nodes[t - 1].size(), kLogZero<Scalar>);
    for (const TrellisArc& a : trellis.arcs[t]) {
      const Scalar v = beta[t][a.dst] + static_cast<Scalar>(a.weight) +
                       scores(t - 1, a.ilabel);
      beta[t - 1][a.src] = log_add(beta[t - 1][a.src], v);
    }
  }
  return beta;
}

// Total recovered from the time slice t: log sum_n alpha_t(n) + beta_t(n).
template <typename Scalar>
Scalar log_total_at(const NodeScores<Scalar>& alpha,
                    const NodeScores<Scalar>& beta, int t) {
  Scalar total = kLogZero<Scalar>;
  for (std::size_t k = 0; k < alpha[t].size(); ++k)
    total = log_add(total, alpha[t][k] + beta[t][k]);
  return total;
}

template <typename Scalar>
ForwardBackward<Scalar> forward_backward(const Trellis& trellis,
                                         const ScoreMatrix<Scalar>& scores) {
  const NodeScores<Scalar> alpha = log_forward_table(trellis, scores);
  const NodeScores<Scalar> beta = log_backward(trellis, scores);
  ForwardBackward<Scalar> out;
  const int T = trellis.num_frames;
  for (std::size_t k = 0; k < alpha[T].size(); ++k)
    out.total = log_add(out.total,
                        alpha[T][k] + static_cast<Scalar>(trellis.final_weights[k]));
  out.stored_frames = static_cast<std::size_t>(trellis.num_frames) + 1;
  out.occupancy = Occupancy<Scalar>::Zero(scores.rows(), scores.cols());
  for (int t = 1; t <= trellis.num_frames; ++t) {
    for (const TrellisArc& a : trellis.arcs[t]) {
      const Scalar v = alpha[t - 1][a.src] + static_cast<Scalar>(a.weight) +
                       scores(t - 1, a.ilabel) + beta[t][a.dst] - out.total;
      out.occupancy(t - 1, a.ilabel) += std::exp(v);
    }
  }
  return out;
}

template <typename Scalar>
Occupancy<Scalar> occupancy(const Trellis& trellis,
                            const ScoreMatrix<Scalar>& scores) {
  return forward_backward(trellis, scores).occupancy;
}

// Forward-backward directly on an input-epsilon-free graph over T frames,
// without unrolling. For graphs with more than `materialize_limit` states the
// per-frame activations are kept only at sqrt(T)-spaced checkpoints and
// recomputed segment by segment during the backward sweep.
template <typename Scalar>
ForwardBackward<Scalar> graph_forward_backward(
    const Fst& graph, const ScoreMatrix<Scalar>& scores,
    std::size_t materialize_limit = 4096) {
  const int T = static_cast<int>(scores.rows());
  const int n = graph.num_states();
  if (T < 1) throw Error("forward-backward: empty score matrix");
  using Vec = std::vector<Scalar>;

  auto step = [&](const Vec& prev, int t) {
    Vec next(n, kLogZero<Scalar>);
    for (const Arc& a : graph.arcs()) {
      if (prev[a.src] == kLogZero<Scalar>) continue;
      next[a.dst] = log_add(next[a.dst], prev[a.src] + static_cast<Scalar>(a.weight) +
                                             scores(t - 1, a.ilabel));
    }
    return next;
  };

  const bool stream = static_cast<std::size_t>(n) > materialize_limit;
  const int stride =
      stream ? std::max(1, static_cast<int>(std::ceil(std::sqrt(double(T))))) : 1;

  // alpha at t = 0, stride, 2 * stride, ... (every frame when not streaming).
  std::vector<Vec> checkpoints;
  Vec alpha(n, kLogZero<Scalar>);
  alpha[graph.start()] = Scalar(0);
  checkpoints.push_back(alpha);
  for (int t = 1; t <= T; ++t) {
    alpha = step(alpha, t);
    if (t % stride == 0) checkpoints.push_back(alpha);
  }

  ForwardBackward<Scalar> out;
  out.total = kLogZero<Scalar>;
  for (int s = 0; s < n; ++s) {
    if (graph.is_final(s))
      out.total = log_add(out.total, alpha[s] + static_cast<Scalar>(graph.final_weight(s)));
  }
  if (out.total == kLogZero<Scalar>)
    throw Error("transcript longer than utterance: graph has no accepting path of " +
                std::to_string(T) + " frames");
  out.occupancy = Occupancy<Scalar>::Zero(T, scores.cols());

  // Segment cache holding alpha_{first} .. alpha_{first + size - 1}.
  std::vector<Vec> segment;
  int segment_first = -1;
  auto alpha_at = [&](int t) -> const Vec& {
    if (!stream) return checkpoints[t];
    if (segment_first < 0 || t < segment_first ||
        t >= segment_first + static_cast<int>(segment.size())) {
      segment_first = (t / stride) * stride;
      segment.clear();
      segment.push_back(checkpoints[t / stride]);
      const int last = std::min(T, segment_first + stride - 1);
      for (int u = segment_first + 1; u <= last; ++u)
        segment.push_back(step(segment.back(), u));
    }
    return segment[t - segment_first];
  };

  Vec beta(n, kLogZero<Scalar>);
  for (int s = 0; s < n; ++s)
    if (graph.is_final(s)) beta[s] = static_cast<Scalar>(graph.final_weight(s));
  for (int t = T; t >= 1; --t) {
    const Vec& prev_alpha = alpha_at(t - 1);
    Vec prev_beta(n, kLogZero<Scalar>);
    for (const Arc& a : graph.arcs()) {
      if (beta[a.dst] == kLogZero<Scalar>) continue;
      const Scalar arc = static_cast<Scalar>(a.weight) + scores(t - 1, a.ilabel);
      prev_beta[a.src] = log_add(prev_beta[a.src], arc + beta[a.dst]);
      if (prev_alpha[a.src] == kLogZero<Scalar>) continue;
      out.occupancy(t - 1, a.ilabel) +=
          std::exp(prev_alpha[a.src] + arc + beta[a.dst] - out.total);
    }
    beta = std::move(prev_beta);
  }
  out.stored_frames = checkpoints.size() + (stream ? static_cast<std::size_t>(stride) : 0);
  return out;
}

}  // namespace cdctc
