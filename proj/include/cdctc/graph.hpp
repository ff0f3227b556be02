// cdctc/graph.hpp

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
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/fst.hpp"

namespace cdctc {

// CTC decoding transducer over a CI alphabet: one state per base symbol
// (state 0 is the start/blank state), accepts every string over L^.
Fst ci_decoding_graph(const CdAlphabet& alphabet);

// Bi-/tri-char decoding transducer with a single blank. Accepts exactly the
// valid extended transcripts; output labels are centers, emitted once per run.
Fst cd_decoding_graph(const CdAlphabet& alphabet);

// Bi-char decoding transducer with context-dependent blanks.
Fst cd_blank_decoding_graph(const CdAlphabet& alphabet);

// Dispatches on alphabet order and blank mode.
Fst decoding_graph(const CdAlphabet& alphabet);

enum class NumeratorKind {
  // B^-1(Y) restricted to valid strings; the global-normalization numerator.
  kValid,
  // B^-1(Y_E) with no validity filter, Y_E the context expansion of the
  // transcript: CD symbols are fixed, but any blank variant may fill a gap.
  // This is the set the frame-normalized criterion sums over; it coincides
  // with kValid for single-blank alphabets.
  kRelaxed,
};

// Per-utterance training graph for a CI transcript (base ids).
Fst numerator_graph(std::span<const int> transcript, const CdAlphabet& alphabet,
                    NumeratorKind kind = NumeratorKind::kValid);

struct TrellisArc {
  int src = 0;  // index into nodes[t - 1]
  int dst = 0;  // index into nodes[t]
  int ilabel = 0;
  int arc_id = 0;  // arc id in the source graph
  double weight = 0.0;
};

// A graph unrolled over T frames and pruned to the nodes lying on accepting
// length-T paths. nodes[0] holds the start state; arcs[t] (t >= 1) consume
// frame t - 1 and are ordered by arc id.
struct Trellis {
  int num_frames = 0;
  std::vector<std::vector<int>> nodes;
  std::vector<std::vector<TrellisArc>> arcs;
  std::vector<double> final_weights;  // parallel to nodes[T]
};

// Throws Error("transcript longer than utterance ...") when the graph has no
// accepting path of length T.
Trellis unroll(const Fst& graph, int num_frames);

// Number of accepting paths, in floating point.
double path_count(const Trellis& trellis);

// All ilabel strings of accepting paths, sorted.
std::vector<std::vector<int>> trellis_language(const Trellis& trellis);

}  // namespace cdctc
