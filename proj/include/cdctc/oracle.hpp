// cdctc/oracle.hpp

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

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/forward_backward.hpp"

// Brute-force references for small instances. Nothing here goes through the
// graph builders or the forward-backward recursions.
namespace cdctc::oracle {

inline constexpr double kEnumerationGuard = 1e7;

enum class Validity { kNone, kOverlap, kCdBlank };

struct EnumerationSpec {
  const CdAlphabet* alphabet = nullptr;
  int length = 1;
  Validity validity = Validity::kNone;
  std::optional<std::vector<int>> target;  // CI transcript filter
};

// Validity by definition: the non-blank runs must be exactly the context
// expansion of their own centers, and CD blanks must carry the center of the
// preceding run.
bool valid_by_definition(const CdAlphabet& alphabet, std::span<const int> s);

// Removes repeats, then blanks, then maps to centers.
std::vector<int> reduce(const CdAlphabet& alphabet, std::span<const int> s);

// All length-T strings over the usable symbols passing the filters, in
// lexicographic order of ids. Throws when |usable|^T exceeds the guard.
std::vector<std::vector<int>> enumerate(const EnumerationSpec& spec);

// B at the level of CD ids: removes repeats, then blanks (of any context).
std::vector<int> reduce_cd(const CdAlphabet& alphabet, std::span<const int> s);

// Context expansion Y_E of a CI transcript via alphabet look-ups; nullopt
// when some CD symbol is missing from the inventory.
std::optional<std::vector<int>> expand(const CdAlphabet& alphabet,
                                       std::span<const int> transcript);

struct BruteLoss {
  // -log sum over strings whose CD-level reduction is Y_E of the product of
  // per-frame softmax values; no validity filter.
  double local_nll = 0;
  double global_nll = 0;  // valid numerator over valid denominator
};

// +inf when the target has no realization.
BruteLoss brute_loss(const ScoreMatrix<double>& scores, const CdAlphabet& alphabet,
                     std::span<const int> target);

// Expansion of the displayed regular expression for the transcript's
// extended strings, e.g. for CI "abba":
//   ∅* a a* ∅* b b* ∅ ∅* b b* ∅* a a* ∅*
// with context-dependent symbols and blanks substituted per topology.
std::set<std::vector<int>> pattern_language(std::span<const int> transcript,
                                            const CdAlphabet& alphabet, int length);

}  // namespace cdctc::oracle
