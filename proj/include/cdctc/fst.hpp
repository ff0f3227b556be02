// cdctc/fst.hpp

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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cdctc {

// Output-side epsilon. Base id 0 is the blank, which is never emitted.
inline constexpr int kEpsilon = 0;

struct Arc {
  int src = 0;
  int dst = 0;
  int ilabel = 0;  // CD symbol id
  int olabel = kEpsilon;  // base symbol id
  double weight = 0.0;  // log domain
};

// Weighted transducer over the log semiring, input-epsilon free. Arcs are
// stored sorted by source state (stable in insertion order) with per-state
// ranges, so arc ids ascend with (src, insertion order).
class Fst {
 public:
  Fst() = default;

  int num_states() const { return num_states_; }
  int start() const { return start_; }
  std::span<const Arc> arcs() const { return arcs_; }
  std::span<const Arc> arcs_from(int state) const {
    return std::span<const Arc>(arcs_).subspan(
        begin_[state], begin_[state + 1] - begin_[state]);
  }
  int arc_begin(int state) const { return begin_[state]; }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }

  bool is_final(int state) const;
  // Log-domain final weight; -inf when not final.
  double final_weight(int state) const { return final_[state]; }

 private:
  friend class FstBuilder;
  int num_states_ = 0;
  int start_ = 0;
  std::vector<Arc> arcs_;
  std::vector<int> begin_;
  std::vector<double> final_;
};

class FstBuilder {
 public:
  int add_state();
  void set_start(int state) { start_ = state; }
  void add_arc(int src, int dst, int ilabel, int olabel, double weight = 0.0);
  void set_final(int state, double weight = 0.0);
  int num_states() const { return num_states_; }
  Fst build() const;

 private:
  int num_states_ = 0;
  int start_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::pair<int, double>> finals_;
};

// Removes states that are not both accessible and co-accessible; surviving
// states keep their relative order.
Fst connect(const Fst& fst);

// One arc per line, src<TAB>dst<TAB>ilabel<TAB>olabel<TAB>weight, start-state
// arcs first; then final lines state<TAB>weight. 17 significant digits.
void write_fst_text(std::ostream& os, const Fst& fst);
Fst read_fst_text(std::istream& is);

}  // namespace cdctc
