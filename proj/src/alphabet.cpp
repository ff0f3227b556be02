// cdctc/alphabet.cpp

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

#include "cdctc/alphabet.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cdctc/common.hpp"

namespace cdctc {

CdAlphabet CdAlphabet::ci(const std::vector<std::string>& chars) {
  if (chars.empty()) throw Error("alphabet: empty symbol list");
  CdAlphabet a;
  a.order_ = 1;
  a.base_.push_back({kBlank, std::string(kBlankName)});
  std::set<std::string> seen{std::string(kBlankName)};
  for (const auto& name : chars) {
    if (name.empty()) throw Error("alphabet: empty symbol name");
    if (!seen.insert(name).second)
      throw Error("alphabet: duplicate symbol '" + name + "'");
    a.base_.push_back({static_cast<int>(a.base_.size()), name});
  }
  for (const auto& s : a.base_) {
    CdSymbol cd;
    cd.center = s.id;
    cd.is_blank = s.id == kBlank;
    cd.id = s.id;
    a.symbols_.push_back(cd);
    a.usable_.push_back(true);
  }
  a.finalize();
  return a;
}

CdAlphabet CdAlphabet::bichar(const CdAlphabet& base, BlankMode mode) {
  if (base.order() != 1) throw Error("bichar alphabet: base must have order 1");
  CdAlphabet a;
  a.order_ = 2;
  a.blank_mode_ = mode;
  a.base_ = base.base_;
  const int n = a.base_size();
  for (int left = 0; left < n; ++left) {
    for (int center = 0; center < n; ++center) {
      CdSymbol cd;
      cd.left = left;
      cd.center = center;
      cd.is_blank = center == kBlank;
      cd.id = left * n + center;
      a.symbols_.push_back(cd);
      const bool usable = center != kBlank || left == kBlank ||
                          mode == BlankMode::kContextDependent;
      a.usable_.push_back(usable);
    }
  }
  a.finalize();
  return a;
}

CdAlphabet CdAlphabet::trichar(const CdAlphabet& base,
                               std::vector<Triple> allowed) {
  if (base.order() != 1) throw Error("trichar alphabet: base must have order 1");
  if (allowed.empty()) throw Error("trichar alphabet: empty allowed set");
  const int n = base.base_size();
  for (const auto& t : allowed) {
    for (int part : t) {
      if (part < 0 || part >= n)
        throw Error("trichar alphabet: unknown base symbol id " +
                    std::to_string(part));
    }
    if (t[1] == kBlank)
      throw Error("trichar alphabet: blank center in allowed triple");
  }
  std::sort(allowed.begin(), allowed.end());
  allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());

  CdAlphabet a;
  a.order_ = 3;
  a.base_ = base.base_;
  a.triples_ = std::move(allowed);
  CdSymbol blank;
  blank.is_blank = true;
  a.symbols_.push_back(blank);
  a.usable_.push_back(true);
  for (const auto& t : a.triples_) {
    CdSymbol cd;
    cd.left = t[0];
    cd.center = t[1];
    cd.right = t[2];
    cd.id = static_cast<int>(a.symbols_.size());
    a.symbols_.push_back(cd);
    a.usable_.push_back(true);
  }
  a.finalize();
  return a;
}

void CdAlphabet::finalize() {
  for (int id = 0; id < size(); ++id) {
    if (!usable_[id]) continue;
    usable_ids_.push_back(id);
    if (symbols_[id].is_blank) blank_ids_.push_back(id);
  }
}

int CdAlphabet::base_id(std::string_view name) const {
  for (const auto& s : base_)
    if (s.name == name) return s.id;
  throw Error("alphabet: unknown symbol '" + std::string(name) + "'");
}

std::optional<int> CdAlphabet::find(int left, int center, int right) const {
  const int n = base_size();
  if (center < 0 || center >= n) return std::nullopt;
  switch (order_) {
    case 1:
      if (left != kNoContext || right != kNoContext) return std::nullopt;
      return center;
    case 2: {
      if (right != kNoContext || left < 0 || left >= n) return std::nullopt;
      const int id = left * n + center;
      if (!usable_[id]) return std::nullopt;
      return id;
    }
    default: {
      if (center == kBlank) {
        if (left == kNoContext && right == kNoContext) return 0;
        return std::nullopt;
      }
      const Triple key{left, center, right};
      auto it = std::lower_bound(triples_.begin(), triples_.end(), key);
      if (it == triples_.end() || *it != key) return std::nullopt;
      return static_cast<int>(it - triples_.begin()) + 1;
    }
  }
}

std::string CdAlphabet::name(int id) const {
  const CdSymbol& s = symbol(id);
  if (s.is_blank && (order_ == 3 || blank_mode_ == BlankMode::kSingle))
    return std::string(kBlankName);
  std::string out;
  if (s.left != kNoContext) out += base_name(s.left);
  out += base_name(s.center);
  if (s.right != kNoContext) out += base_name(s.right);
  return out;
}

bool overlap_ok(const CdAlphabet& alphabet, int prev, int next) {
  if (!alphabet.usable(prev) || !alphabet.usable(next)) return false;
  if (prev == next || alphabet.order() == 1) return true;
  const CdSymbol& p = alphabet.symbol(prev);
  const CdSymbol& n = alphabet.symbol(next);
  const bool single = alphabet.blank_mode() == BlankMode::kSingle;
  if (p.is_blank && single) return true;
  const int context = p.is_blank ? p.left : p.center;
  if (n.is_blank) return single || n.left == context;
  if (n.left != context) return false;
  if (alphabet.order() == 3 && !p.is_blank) return p.right == n.center;
  return true;
}

bool is_valid(const CdAlphabet& alphabet, std::span<const int> extended) {
  constexpr int kAny = kNoContext;
  int context = kBlank;
  int expected = kAny;
  int prev = -1;
  const bool cd_blank = alphabet.blank_mode() == BlankMode::kContextDependent;
  for (int id : extended) {
    if (id < 0 || id >= alphabet.size() || !alphabet.usable(id)) return false;
    if (id == prev) continue;
    prev = id;
    if (alphabet.order() == 1) continue;
    const CdSymbol& s = alphabet.symbol(id);
    if (s.is_blank) {
      if (cd_blank && s.left != context) return false;
      continue;
    }
    if (s.left != context) return false;
    if (alphabet.order() == 3) {
      if (expected != kAny && s.center != expected) return false;
      expected = s.right;
    }
    context = s.center;
  }
  return alphabet.order() != 3 || expected == kAny || expected == kBlank;
}

std::vector<int> collapse(const CdAlphabet& alphabet,
                          std::span<const int> extended) {
  std::vector<int> out;
  int prev = -1;
  for (int id : extended) {
    if (id != prev) {
      const CdSymbol& s = alphabet.symbol(id);
      if (!s.is_blank) out.push_back(s.center);
    }
    prev = id;
  }
  return out;
}

std::vector<int> cd_expand(const CdAlphabet& alphabet,
                           std::span<const int> transcript) {
  const int n = static_cast<int>(transcript.size());
  std::vector<int> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int center = transcript[i];
    if (center <= kBlank || center >= alphabet.base_size())
      throw Error("cd_expand: transcript symbol outside base alphabet");
    int left = kNoContext;
    int right = kNoContext;
    if (alphabet.order() >= 2) left = i > 0 ? transcript[i - 1] : kBlank;
    if (alphabet.order() == 3) right = i + 1 < n ? transcript[i + 1] : kBlank;
    auto id = alphabet.find(left, center, right);
    if (!id) {
      auto part = [&](int b) {
        return b == kNoContext ? std::string("-") : alphabet.base_name(b);
      };
      throw Error("cd_expand: CD symbol (" + part(left) + "," + part(center) +
                  "," + part(right) + ") is outside the inventory");
    }
    out.push_back(*id);
  }
  return out;
}

std::vector<int> parse_transcript(const CdAlphabet& alphabet,
                                  std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    int best = -1;
    std::size_t best_len = 0;
    for (const auto& s : alphabet.base()) {
      if (s.id == kBlank) continue;
      if (s.name.size() > best_len && text.substr(0, s.name.size()) == s.name) {
        best = s.id;
        best_len = s.name.size();
      }
    }
    if (best < 0)
      throw Error("transcript: unknown symbol at '" + std::string(text) + "'");
    out.push_back(best);
    text.remove_prefix(best_len);
  }
  return out;
}

std::string format_transcript(const CdAlphabet& alphabet,
                              std::span<const int> transcript) {
  std::string out;
  for (int id : transcript) out += alphabet.base_name(id);
  return out;
}

std::vector<std::string> read_alphabet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alphabet file " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  return names;
}

std::vector<Triple> read_allowed_file(const std::string& path,
                                      const CdAlphabet& base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open allowed-set file " + path);
  std::vector<Triple> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 3)
      throw Error(path + ":" + std::to_string(lineno) + ": expected 3 fields");
    Triple t;
    for (int k = 0; k < 3; ++k) t[k] = base.base_id(fields[k]);
    out.push_back(t);
  }
  return out;
}

}  // namespace cdctc
