// cdctc/decoder.hpp

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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/forward_backward.hpp"
#include "cdctc/fst.hpp"

namespace cdctc {

// Character n-gram LM with back-off. Tokens are base ids 1..|L| for
// characters, |L^| for </s> and |L^| + 1 for <s> (history only).
// Probabilities are natural-log internally.
class NGramLM {
 public:
  int order() const { return order_; }
  int base_size() const { return base_size_; }
  bool models_end() const { return end_of_sentence_; }
  int end_token() const { return base_size_; }
  int start_token() const { return base_size_ + 1; }
  // Tokens that can be predicted.
  std::vector<int> vocabulary() const;

  // log P(word | history); history is the last order-1 tokens, oldest first.
  double log_prob(std::span<const int> history, int word) const;

  // Dense history-state interface for decoding.
  int num_histories() const { return num_histories_; }
  int initial_history() const { return 0; }
  int advance(int history, int word) const;
  double log_prob(int history, int word) const {
    return table_[static_cast<std::size_t>(history) * (base_size_ + 1) + word];
  }

  // ARPA-style text: \data\ counts, then per order "log10p<TAB>words[<TAB>log10bo]".
  void write_arpa(std::ostream& os, const CdAlphabet& alphabet) const;
  static NGramLM read_arpa(std::istream& is, const CdAlphabet& alphabet);

 private:
  friend NGramLM train_char_lm(const std::vector<std::vector<int>>& corpus,
                               int base_size, int order, bool end_of_sentence);
  void build_table();
  std::vector<int> history_tokens(int history) const;

  int order_ = 2;
  int base_size_ = 0;
  bool end_of_sentence_ = true;
  std::vector<std::map<std::vector<int>, double>> probs_;  // per n-gram order
  std::map<std::vector<int>, double> backoff_;
  int num_histories_ = 0;
  std::vector<double> table_;
};

// Add-one estimates for observed n-grams; unseen events back off to the
// next lower order with the weight that keeps every conditional normalized.
NGramLM train_char_lm(const std::vector<std::vector<int>>& corpus, int base_size,
                      int order, bool end_of_sentence = true);

struct DecodeConfig {
  double acoustic_weight = 1.0;  // kappa
  std::optional<double> beam;
  const NGramLM* lm = nullptr;
};

struct DecodeResult {
  std::vector<int> transcript;
  double score = 0;
};

// Best length-T accepting path under
//   kappa * sum_t acoustic + sum LM log-probs of emitted symbols (+ </s>).
// Ties go to the lowest source state, then the lowest arc id.
DecodeResult viterbi(const ScoreMatrix<double>& scores, const Fst& graph,
                     const DecodeConfig& config);

std::size_t edit_distance(std::span<const int> hyp, std::span<const int> ref);
double error_rate(std::span<const int> hyp, std::span<const int> ref);

struct SweepRow {
  std::string loss_kind;
  double kappa = 0;
  double cer = 0;
};

// Corpus CER (total edits / total reference length) for every kappa.
std::vector<SweepRow> sweep_scores(const std::string& loss_kind,
                                   const std::vector<ScoreMatrix<double>>& scores,
                                   const std::vector<std::vector<int>>& refs,
                                   const Fst& graph, const NGramLM* lm,
                                   std::span<const double> grid);

// Smallest kappa attaining the minimum CER among rows of the given loss kind.
double argmin_kappa(std::span<const SweepRow> rows, const std::string& loss_kind);

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace cdctc
