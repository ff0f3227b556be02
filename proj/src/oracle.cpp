// cdctc/oracle.cpp

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

#include "cdctc/oracle.hpp"

#include <cmath>
#include <limits>

#include "cdctc/common.hpp"

namespace cdctc::oracle {

namespace {

std::vector<int> runs_of(std::span<const int> s) {
  std::vector<int> runs;
  for (std::size_t t = 0; t < s.size(); ++t)
    if (t == 0 || s[t] != s[t - 1]) runs.push_back(s[t]);
  return runs;
}

double guard_count(const CdAlphabet& alphabet, int length) {
  return std::pow(static_cast<double>(alphabet.usable_ids().size()), length);
}

// Visits every length-T string over the usable ids in lexicographic order.
template <typename F>
void for_each_string(const CdAlphabet& alphabet, int length, F&& visit) {
  if (length < 1) throw Error("oracle: length must be positive");
  if (guard_count(alphabet, length) > kEnumerationGuard)
    throw Error("oracle: enumeration guard exceeded");
  const auto usable = alphabet.usable_ids();
  const int base = static_cast<int>(usable.size());
  std::vector<int> digits(length, 0);
  std::vector<int> s(length, usable[0]);
  while (true) {
    visit(std::span<const int>(s));
    int k = length - 1;
    while (k >= 0 && digits[k] == base - 1) {
      digits[k] = 0;
      s[k] = usable[0];
      --k;
    }
    if (k < 0) break;
    ++digits[k];
    s[k] = usable[digits[k]];
  }
}

}  // namespace

bool valid_by_definition(const CdAlphabet& alphabet, std::span<const int> s) {
  for (int id : s)
    if (id < 0 || id >= alphabet.size() || !alphabet.usable(id)) return false;
  if (alphabet.order() == 1) return true;
  const std::vector<int> runs = runs_of(s);
  std::vector<int> centers;
  for (int id : runs)
    if (!alphabet.symbol(id).is_blank) centers.push_back(alphabet.symbol(id).center);
  const int m = static_cast<int>(centers.size());
  int k = 0;
  for (int id : runs) {
    const CdSymbol& sym = alphabet.symbol(id);
    const int preceding = k > 0 ? centers[k - 1] : kBlank;
    if (sym.is_blank) {
      if (alphabet.blank_mode() == BlankMode::kContextDependent &&
          sym.left != preceding)
        return false;
      continue;
    }
    if (sym.left != preceding) return false;
    if (alphabet.order() == 3) {
      const int following = k + 1 < m ? centers[k + 1] : kBlank;
      if (sym.right != following) return false;
    }
    ++k;
  }
  return true;
}

std::vector<int> reduce(const CdAlphabet& alphabet, std::span<const int> s) {
  std::vector<int> out;
  for (int id : runs_of(s))
    if (!alphabet.symbol(id).is_blank) out.push_back(alphabet.symbol(id).center);
  return out;
}

std::vector<int> reduce_cd(const CdAlphabet& alphabet, std::span<const int> s) {
  std::vector<int> out;
  for (int id : runs_of(s))
    if (!alphabet.symbol(id).is_blank) out.push_back(id);
  return out;
}

std::optional<std::vector<int>> expand(const CdAlphabet& alphabet,
                                       std::span<const int> transcript) {
  const int n = static_cast<int>(transcript.size());
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    int left = kNoContext, right = kNoContext;
    if (alphabet.order() >= 2) left = i > 0 ? transcript[i - 1] : kBlank;
    if (alphabet.order() == 3) right = i + 1 < n ? transcript[i + 1] : kBlank;
    const auto id = alphabet.find(left, transcript[i], right);
    if (!id) return std::nullopt;
    out.push_back(*id);
  }
  return out;
}

std::vector<std::vector<int>> enumerate(const EnumerationSpec& spec) {
  if (!spec.alphabet) throw Error("oracle: no alphabet");
  const CdAlphabet& alphabet = *spec.alphabet;
  if (spec.validity == Validity::kCdBlank &&
      alphabet.blank_mode() != BlankMode::kContextDependent)
    throw Error("oracle: cd-blank validity needs a CD-blank alphabet");
  std::vector<std::vector<int>> out;
  for_each_string(alphabet, spec.length, [&](std::span<const int> s) {
    if (spec.validity != Validity::kNone && !valid_by_definition(alphabet, s)) return;
    if (spec.target && reduce(alphabet, s) != *spec.target) return;
    out.emplace_back(s.begin(), s.end());
  });
  return out;
}

BruteLoss brute_loss(const ScoreMatrix<double>& scores, const CdAlphabet& alphabet,
                     std::span<const int> target) {
  const int T = static_cast<int>(scores.rows());
  const std::vector<int> want(target.begin(), target.end());
  const std::optional<std::vector<int>> want_cd = expand(alphabet, target);
  std::vector<double> log_z(T);
  for (int t = 0; t < T; ++t) {
    double z = 0;
    for (int id : alphabet.usable_ids()) z += std::exp(scores(t, id));
    log_z[t] = std::log(z);
  }
  constexpr double kZero = -std::numeric_limits<double>::infinity();
  double local_num = kZero, global_num = kZero, global_den = kZero;
  for_each_string(alphabet, T, [&](std::span<const int> s) {
    double raw = 0, normalized = 0;
    for (int t = 0; t < T; ++t) {
      raw += scores(t, s[t]);
      normalized += scores(t, s[t]) - log_z[t];
    }
    if (want_cd && reduce_cd(alphabet, s) == *want_cd)
      local_num = log_add(local_num, normalized);
    const bool hit = reduce(alphabet, s) == want;
    if (valid_by_definition(alphabet, s)) {
      global_den = log_add(global_den, raw);
      if (hit) global_num = log_add(global_num, raw);
    }
  });
  BruteLoss out;
  out.local_nll = -local_num;
  out.global_nll = global_num == kZero ? std::numeric_limits<double>::infinity()
                                       : global_den - global_num;
  return out;
}

std::set<std::vector<int>> pattern_language(std::span<const int> transcript,
                                            const CdAlphabet& alphabet, int length) {
  const int n = static_cast<int>(transcript.size());
  const bool cd_blank = alphabet.blank_mode() == BlankMode::kContextDependent;
  struct Item {
    int symbol;
    int min_count;
  };
  std::vector<Item> items;
  auto gap_blank = [&](int preceding) {
    return cd_blank ? *alphabet.find(preceding, kBlank) : kBlank;
  };
  items.push_back({gap_blank(kBlank), 0});
  std::vector<int> symbols;
  for (int i = 0; i < n; ++i) {
    int left = kNoContext, right = kNoContext;
    if (alphabet.order() >= 2) left = i > 0 ? transcript[i - 1] : kBlank;
    if (alphabet.order() == 3) right = i + 1 < n ? transcript[i + 1] : kBlank;
    const auto id = alphabet.find(left, transcript[i], right);
    if (!id) return {};
    symbols.push_back(*id);
  }
  for (int i = 0; i < n; ++i) {
    items.push_back({symbols[i], 1});
    const bool repeated = i + 1 < n && symbols[i + 1] == symbols[i];
    items.push_back({gap_blank(transcript[i]), repeated ? 1 : 0});
  }

  std::set<std::vector<int>> out;
  std::vector<int> prefix;
  auto expand = [&](auto&& self, std::size_t item, int remaining) -> void {
    if (item + 1 == items.size()) {
      if (remaining < items[item].min_count) return;
      prefix.insert(prefix.end(), remaining, items[item].symbol);
      out.insert(prefix);
      prefix.resize(prefix.size() - remaining);
      return;
    }
    for (int c = items[item].min_count; c <= remaining; ++c) {
      prefix.insert(prefix.end(), c, items[item].symbol);
      self(self, item + 1, remaining - c);
      prefix.resize(prefix.size() - c);
    }
  };
  expand(expand, 0, length);
  return out;
}

}  // namespace cdctc::oracle
