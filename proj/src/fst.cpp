// cdctc/fst.cpp

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

#include "cdctc/fst.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "cdctc/common.hpp"

namespace cdctc {

bool Fst::is_final(int state) const {
  return final_[state] != kLogZero<double>;
}

int FstBuilder::add_state() { return num_states_++; }

void FstBuilder::add_arc(int src, int dst, int ilabel, int olabel,
                         double weight) {
  arcs_.push_back({src, dst, ilabel, olabel, weight});
}

void FstBuilder::set_final(int state, double weight) {
  finals_.emplace_back(state, weight);
}

Fst FstBuilder::build() const {
  Fst fst;
  fst.num_states_ = num_states_;
  if (num_states_ == 0) throw Error("fst: no states");
  if (start_ < 0 || start_ >= num_states_) throw Error("fst: invalid start");
  fst.start_ = start_;
  fst.arcs_ = arcs_;
  for (const Arc& a : fst.arcs_) {
    if (a.src < 0 || a.src >= num_states_ || a.dst < 0 || a.dst >= num_states_)
      throw Error("fst: arc state out of range");
  }
  std::stable_sort(fst.arcs_.begin(), fst.arcs_.end(),
                   [](const Arc& x, const Arc& y) { return x.src < y.src; });
  fst.begin_.assign(num_states_ + 1, 0);
  for (const Arc& a : fst.arcs_) ++fst.begin_[a.src + 1];
  for (int s = 0; s < num_states_; ++s) fst.begin_[s + 1] += fst.begin_[s];
  fst.final_.assign(num_states_, kLogZero<double>);
  for (auto [state, weight] : finals_) {
    if (state < 0 || state >= num_states_)
      throw Error("fst: final state out of range");
    fst.final_[state] = weight;
  }
  return fst;
}

Fst connect(const Fst& fst) {
  const int n = fst.num_states();
  std::vector<char> access(n, 0), coaccess(n, 0);
  std::vector<int> stack{fst.start()};
  access[fst.start()] = 1;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (const Arc& a : fst.arcs_from(s)) {
      if (!access[a.dst]) {
        access[a.dst] = 1;
        stack.push_back(a.dst);
      }
    }
  }
  std::vector<std::vector<int>> reverse(n);
  for (const Arc& a : fst.arcs()) reverse[a.dst].push_back(a.src);
  for (int s = 0; s < n; ++s) {
    if (fst.is_final(s)) {
      coaccess[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int p : reverse[s]) {
      if (!coaccess[p]) {
        coaccess[p] = 1;
        stack.push_back(p);
      }
    }
  }
  if (!coaccess[fst.start()]) throw Error("fst: empty language");

  std::vector<int> remap(n, -1);
  FstBuilder b;
  for (int s = 0; s < n; ++s)
    if (access[s] && coaccess[s]) remap[s] = b.add_state();
  b.set_start(remap[fst.start()]);
  for (const Arc& a : fst.arcs()) {
    if (remap[a.src] >= 0 && remap[a.dst] >= 0)
      b.add_arc(remap[a.src], remap[a.dst], a.ilabel, a.olabel, a.weight);
  }
  for (int s = 0; s < n; ++s)
    if (remap[s] >= 0 && fst.is_final(s)) b.set_final(remap[s], fst.final_weight(s));
  return b.build();
}

namespace {

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

void write_arc(std::ostream& os, const Arc& a) {
  os << a.src << '\t' << a.dst << '\t' << a.ilabel << '\t' << a.olabel << '\t'
     << format_weight(a.weight) << '\n';
}

}  // namespace

void write_fst_text(std::ostream& os, const Fst& fst) {
  if (fst.arcs_from(fst.start()).empty())
    throw Error("fst text: start state must have an outgoing arc");
  for (const Arc& a : fst.arcs_from(fst.start())) write_arc(os, a);
  for (int s = 0; s < fst.num_states(); ++s) {
    if (s == fst.start()) continue;
    for (const Arc& a : fst.arcs_from(s)) write_arc(os, a);
  }
  for (int s = 0; s < fst.num_states(); ++s)
    if (fst.is_final(s)) os << s << '\t' << format_weight(fst.final_weight(s)) << '\n';
}

Fst read_fst_text(std::istream& is) {
  FstBuilder b;
  std::string line;
  int max_state = -1;
  bool have_start = false;
  std::vector<Arc> arcs;
  std::vector<std::pair<int, double>> finals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() == 5) {
      Arc a{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]),
            std::stod(f[4])};
      if (!have_start) {
        b.set_start(a.src);
        have_start = true;
      }
      max_state = std::max({max_state, a.src, a.dst});
      arcs.push_back(a);
    } else if (f.size() == 2) {
      finals.emplace_back(std::stoi(f[0]), std::stod(f[1]));
      max_state = std::max(max_state, finals.back().first);
    } else {
      throw Error("fst text: malformed line '" + line + "'");
    }
  }
  if (!have_start) throw Error("fst text: no arcs");
  for (int s = 0; s <= max_state; ++s) b.add_state();
  for (const Arc& a : arcs) b.add_arc(a.src, a.dst, a.ilabel, a.olabel, a.weight);
  for (auto [s, w] : finals) b.set_final(s, w);
  return b.build();
}

}  // namespace cdctc
