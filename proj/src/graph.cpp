// cdctc/graph.cpp

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

#include "cdctc/graph.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "cdctc/common.hpp"

namespace cdctc {

Fst ci_decoding_graph(const CdAlphabet& alphabet) {
  if (alphabet.order() != 1) throw Error("ci_decoding_graph: order-1 alphabet required");
  const int n = alphabet.base_size();
  FstBuilder b;
  for (int s = 0; s < n; ++s) b.add_state();
  b.set_start(0);
  for (int s = 0; s < n; ++s) {
    b.add_arc(s, kBlank, kBlank, kEpsilon);
    for (int c = 1; c < n; ++c) b.add_arc(s, c, c, c == s ? kEpsilon : c);
    b.set_final(s);
  }
  return b.build();
}

namespace {

// Bi-char topology shared by the single-blank and CD-blank variants; they only
// differ in the label on blank arcs.
Fst bichar_graph(const CdAlphabet& alphabet) {
  const int n = alphabet.base_size();
  const bool cd_blank = alphabet.blank_mode() == BlankMode::kContextDependent;
  FstBuilder b;
  const int start = b.add_state();
  b.set_start(start);

  std::vector<int> state_of(alphabet.size(), -1);
  std::vector<int> context(1, kBlank);
  std::vector<int> symbol_of(1, -1);
  for (int id : alphabet.usable_ids()) {
    if (alphabet.symbol(id).is_blank) continue;
    state_of[id] = b.add_state();
    context.push_back(alphabet.symbol(id).center);
    symbol_of.push_back(id);
  }
  std::vector<int> blank_state(n, -1);
  for (int c = 1; c < n; ++c) {
    blank_state[c] = b.add_state();
    context.push_back(c);
    symbol_of.push_back(-1);
  }

  for (int src = 0; src < b.num_states(); ++src) {
    const int ctx = context[src];
    const int self = symbol_of[src];
    if (self >= 0) b.add_arc(src, src, self, kEpsilon);
    const int blank_label = cd_blank ? *alphabet.find(ctx, kBlank) : kBlank;
    b.add_arc(src, src == start ? start : blank_state[ctx], blank_label, kEpsilon);
    for (int c = 1; c < n; ++c) {
      const int next = *alphabet.find(ctx, c);
      if (next == self) continue;
      b.add_arc(src, state_of[next], next, c);
    }
    b.set_final(src);
  }
  return b.build();
}

Fst trichar_graph(const CdAlphabet& alphabet) {
  constexpr int kAny = kNoContext;
  FstBuilder b;
  const int start = b.add_state();
  b.set_start(start);

  // Successors keyed by (context, expected center); kAny accepts all centers.
  std::map<std::pair<int, int>, std::vector<int>> successors;
  std::vector<int> state_of(alphabet.size(), -1);
  std::vector<std::pair<int, int>> context{{kBlank, kAny}};
  std::vector<int> symbol_of{-1};
  for (int id = 1; id < alphabet.size(); ++id) {
    const CdSymbol& s = alphabet.symbol(id);
    successors[{s.left, s.center}].push_back(id);
    successors[{s.left, kAny}].push_back(id);
    state_of[id] = b.add_state();
    context.emplace_back(s.center, s.right);
    symbol_of.push_back(id);
  }
  std::map<std::pair<int, int>, int> blank_state;
  for (int id = 1; id < alphabet.size(); ++id) {
    const CdSymbol& s = alphabet.symbol(id);
    const std::pair<int, int> key{s.center, s.right};
    if (!blank_state.count(key)) {
      blank_state[key] = b.add_state();
      context.push_back(key);
      symbol_of.push_back(-1);
    }
  }

  for (int src = 0; src < b.num_states(); ++src) {
    const auto [ctx, expected] = context[src];
    const int self = symbol_of[src];
    if (self >= 0) b.add_arc(src, src, self, kEpsilon);
    b.add_arc(src, src == start ? start : blank_state.at(context[src]), kBlank,
              kEpsilon);
    if (expected != kBlank) {
      auto it = successors.find({ctx, expected});
      if (it != successors.end()) {
        for (int next : it->second) {
          if (next == self) continue;
          b.add_arc(src, state_of[next], next, alphabet.symbol(next).center);
        }
      }
    }
    if (expected == kAny || expected == kBlank) b.set_final(src);
  }
  return connect(b.build());
}

}  // namespace

Fst cd_decoding_graph(const CdAlphabet& alphabet) {
  if (alphabet.order() < 2) throw Error("cd_decoding_graph: order >= 2 required");
  if (alphabet.blank_mode() != BlankMode::kSingle)
    throw Error("cd_decoding_graph: single-blank alphabet required");
  return alphabet.order() == 2 ? bichar_graph(alphabet) : trichar_graph(alphabet);
}

Fst cd_blank_decoding_graph(const CdAlphabet& alphabet) {
  if (alphabet.order() != 2 ||
      alphabet.blank_mode() != BlankMode::kContextDependent)
    throw Error("cd_blank_decoding_graph: bi-char CD-blank alphabet required");
  return bichar_graph(alphabet);
}

Fst decoding_graph(const CdAlphabet& alphabet) {
  if (alphabet.order() == 1) return ci_decoding_graph(alphabet);
  if (alphabet.blank_mode() == BlankMode::kContextDependent)
    return cd_blank_decoding_graph(alphabet);
  return cd_decoding_graph(alphabet);
}

Fst numerator_graph(std::span<const int> transcript, const CdAlphabet& alphabet,
                    NumeratorKind kind) {
  if (transcript.empty()) throw Error("numerator_graph: empty transcript");
  const int len = static_cast<int>(transcript.size());
  const bool cd_blank = alphabet.blank_mode() == BlankMode::kContextDependent;

  // Admissible symbols per position and blanks per gap (gap i follows
  // position i; gap 0 precedes the first symbol).
  std::vector<std::vector<int>> position(len);
  std::vector<std::vector<int>> gap(len + 1);
  const std::vector<int> expanded = cd_expand(alphabet, transcript);
  for (int i = 0; i < len; ++i) position[i] = {expanded[i]};
  const std::vector<int> blanks(alphabet.blank_ids().begin(), alphabet.blank_ids().end());
  for (int i = 0; i <= len; ++i) {
    const int ctx = i == 0 ? kBlank : transcript[i - 1];
    if (kind == NumeratorKind::kValid)
      gap[i] = {cd_blank ? *alphabet.find(ctx, kBlank) : kBlank};
    else
      gap[i] = blanks;
  }

  FstBuilder b;
  std::vector<int> gap_state(len + 1);
  std::vector<std::vector<int>> sym_state(len);
  gap_state[0] = b.add_state();
  b.set_start(gap_state[0]);
  for (int i = 0; i < len; ++i) {
    for (std::size_t k = 0; k < position[i].size(); ++k)
      sym_state[i].push_back(b.add_state());
    gap_state[i + 1] = b.add_state();
  }

  for (int blank : gap[0]) b.add_arc(gap_state[0], gap_state[0], blank, kEpsilon);
  for (std::size_t k = 0; k < position[0].size(); ++k)
    b.add_arc(gap_state[0], sym_state[0][k], position[0][k], transcript[0]);
  for (int i = 0; i < len; ++i) {
    for (std::size_t k = 0; k < position[i].size(); ++k) {
      const int src = sym_state[i][k];
      const int self = position[i][k];
      b.add_arc(src, src, self, kEpsilon);
      for (int blank : gap[i + 1]) b.add_arc(src, gap_state[i + 1], blank, kEpsilon);
      if (i + 1 < len) {
        for (std::size_t j = 0; j < position[i + 1].size(); ++j) {
          if (position[i + 1][j] == self) continue;
          b.add_arc(src, sym_state[i + 1][j], position[i + 1][j], transcript[i + 1]);
        }
      } else {
        b.set_final(src);
      }
    }
    const int g = gap_state[i + 1];
    for (int blank : gap[i + 1]) b.add_arc(g, g, blank, kEpsilon);
    if (i + 1 < len) {
      for (std::size_t j = 0; j < position[i + 1].size(); ++j)
        b.add_arc(g, sym_state[i + 1][j], position[i + 1][j], transcript[i + 1]);
    }
  }
  b.set_final(gap_state[len]);
  return b.build();
}

Trellis unroll(const Fst& graph, int num_frames) {
  if (num_frames < 1) throw Error("unroll: frame count must be positive");
  const int n = graph.num_states();
  const int T = num_frames;
  std::vector<std::vector<char>> reach(T + 1, std::vector<char>(n, 0));
  reach[0][graph.start()] = 1;
  for (int t = 1; t <= T; ++t) {
    for (int s = 0; s < n; ++s) {
      if (!reach[t - 1][s]) continue;
      for (const Arc& a : graph.arcs_from(s)) reach[t][a.dst] = 1;
    }
  }
  std::vector<std::vector<char>> keep(T + 1, std::vector<char>(n, 0));
  bool any_final = false;
  for (int s = 0; s < n; ++s) {
    keep[T][s] = reach[T][s] && graph.is_final(s);
    any_final = any_final || keep[T][s];
  }
  if (!any_final) {
    throw Error("transcript longer than utterance: no accepting path of " +
                std::to_string(T) + " frames");
  }
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < n; ++s) {
      if (!reach[t][s]) continue;
      for (const Arc& a : graph.arcs_from(s)) {
        if (keep[t + 1][a.dst]) {
          keep[t][s] = 1;
          break;
        }
      }
    }
  }

  Trellis tr;
  tr.num_frames = T;
  tr.nodes.resize(T + 1);
  tr.arcs.resize(T + 1);
  std::vector<int> index(n, -1), prev_index(n, -1);
  for (int s = 0; s < n; ++s) {
    if (keep[0][s]) {
      prev_index[s] = static_cast<int>(tr.nodes[0].size());
      tr.nodes[0].push_back(s);
    }
  }
  for (int t = 1; t <= T; ++t) {
    std::fill(index.begin(), index.end(), -1);
    for (int s = 0; s < n; ++s) {
      if (keep[t][s]) {
        index[s] = static_cast<int>(tr.nodes[t].size());
        tr.nodes[t].push_back(s);
      }
    }
    for (int s : tr.nodes[t - 1]) {
      for (int k = graph.arc_begin(s); k < graph.arc_begin(s + 1); ++k) {
        const Arc& a = graph.arcs()[k];
        if (index[a.dst] < 0) continue;
        tr.arcs[t].push_back({prev_index[s], index[a.dst], a.ilabel, k, a.weight});
      }
    }
    std::swap(index, prev_index);
  }
  for (int s : tr.nodes[T]) tr.final_weights.push_back(graph.final_weight(s));
  return tr;
}

double path_count(const Trellis& trellis) {
  std::vector<double> count(trellis.nodes[0].size(), 1.0);
  for (int t = 1; t <= trellis.num_frames; ++t) {
    std::vector<double> next(trellis.nodes[t].size(), 0.0);
    for (const TrellisArc& a : trellis.arcs[t]) next[a.dst] += count[a.src];
    count = std::move(next);
  }
  double total = 0.0;
  for (double c : count) total += c;
  return total;
}

std::vector<std::vector<int>> trellis_language(const Trellis& trellis) {
  const int T = trellis.num_frames;
  // Outgoing arcs per node per step.
  std::vector<std::vector<std::vector<int>>> out(T + 1);
  for (int t = 1; t <= T; ++t) {
    out[t].resize(trellis.nodes[t - 1].size());
    for (std::size_t k = 0; k < trellis.arcs[t].size(); ++k)
      out[t][trellis.arcs[t][k].src].push_back(static_cast<int>(k));
  }
  std::vector<std::vector<int>> strings;
  std::vector<int> prefix;
  auto visit = [&](auto&& self, int t, int node) -> void {
    if (t == T) {
      strings.push_back(prefix);
      return;
    }
    for (int k : out[t + 1][node]) {
      const TrellisArc& a = trellis.arcs[t + 1][k];
      prefix.push_back(a.ilabel);
      self(self, t + 1, a.dst);
      prefix.pop_back();
    }
  };
  for (std::size_t node = 0; node < trellis.nodes[0].size(); ++node)
    visit(visit, 0, static_cast<int>(node));
  std::sort(strings.begin(), strings.end());
  return strings;
}

}  // namespace cdctc
