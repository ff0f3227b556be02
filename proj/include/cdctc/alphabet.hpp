// cdctc/alphabet.hpp

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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdctc {

// Base-alphabet id of the blank. Also serves as the boundary context.
inline constexpr int kBlank = 0;
// Context slot that is not used by this alphabet order (right context of a
// bi-char, both contexts of a CI symbol).
inline constexpr int kNoContext = -1;

inline constexpr std::string_view kBlankName = "\xE2\x88\x85";  // ∅

enum class BlankMode { kSingle, kContextDependent };

struct Symbol {
  int id = 0;
  std::string name;
};

struct CdSymbol {
  int left = kNoContext;
  int center = kBlank;
  int right = kNoContext;
  bool is_blank = false;
  int id = 0;
};

// (left, center, right) in base ids; kBlank marks the utterance boundary.
using Triple = std::array<int, 3>;

// Indexed inventory of context-dependent output symbols over a CI base.
//
// Ids are dense and deterministic:
//  - order 1: id = base id, blank at 0.
//  - order 2: id = left * |L^| + center over the full |L^|^2 space. With a
//    single blank the (0, 0) slot is the context-free blank and the remaining
//    blank-centered slots are unusable; in CD-blank mode (l, 0) is the blank
//    carrying left context l.
//  - order 3: blank at 0, then the allowed triples sorted by (l, c, r).
// Immutable after construction.
class CdAlphabet {
 public:
  static CdAlphabet ci(const std::vector<std::string>& chars);
  static CdAlphabet bichar(const CdAlphabet& base, BlankMode mode);
  static CdAlphabet trichar(const CdAlphabet& base, std::vector<Triple> allowed);

  int order() const { return order_; }
  BlankMode blank_mode() const { return blank_mode_; }

  // Size of the id space (score-matrix width).
  int size() const { return static_cast<int>(symbols_.size()); }
  // Size of the CI alphabet including the blank.
  int base_size() const { return static_cast<int>(base_.size()); }
  const std::vector<Symbol>& base() const { return base_; }
  int base_id(std::string_view name) const;

  const CdSymbol& symbol(int id) const { return symbols_.at(id); }
  bool usable(int id) const { return usable_.at(id); }
  std::span<const int> usable_ids() const { return usable_ids_; }
  std::span<const int> blank_ids() const { return blank_ids_; }

  // Id of the CD symbol with the given components; nullopt when outside the
  // inventory or unusable. Unused context slots take kNoContext.
  std::optional<int> find(int left, int center, int right = kNoContext) const;

  std::string name(int id) const;
  std::string base_name(int base) const { return base_.at(base).name; }

 private:
  CdAlphabet() = default;
  void finalize();

  int order_ = 1;
  BlankMode blank_mode_ = BlankMode::kSingle;
  std::vector<Symbol> base_;
  std::vector<CdSymbol> symbols_;
  std::vector<bool> usable_;
  std::vector<int> usable_ids_;
  std::vector<int> blank_ids_;
  std::vector<Triple> triples_;  // order 3 lookup, sorted
};

// True iff `next` may immediately follow `prev` in a valid extended
// transcript. A context-free blank is transparent, so pairs involving it are
// accepted here; is_valid() tracks the context across blanks.
bool overlap_ok(const CdAlphabet& alphabet, int prev, int next);

// Full validity of an extended transcript (sequence of CD ids): every new
// symbol's left context equals the last exposed center, CD blanks carry the
// exposed center, tri-char right contexts are honoured and the last tri-char
// has a boundary right context.
bool is_valid(const CdAlphabet& alphabet, std::span<const int> extended);

// B: drop repetitions, then blanks, then map to centers (base ids).
std::vector<int> collapse(const CdAlphabet& alphabet,
                          std::span<const int> extended);

// Context expansion of a CI transcript (base ids, no blanks).
std::vector<int> cd_expand(const CdAlphabet& alphabet,
                           std::span<const int> transcript);

// Base ids for a string such as "abba" where every character is a symbol name.
std::vector<int> parse_transcript(const CdAlphabet& alphabet,
                                  std::string_view text);
std::string format_transcript(const CdAlphabet& alphabet,
                              std::span<const int> transcript);

// One symbol name per line.
std::vector<std::string> read_alphabet_file(const std::string& path);
// Tab-separated triples of names; "∅" is the boundary.
std::vector<Triple> read_allowed_file(const std::string& path,
                                      const CdAlphabet& base);

}  // namespace cdctc
