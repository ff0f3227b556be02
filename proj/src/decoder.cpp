// cdctc/decoder.cpp

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

#include "cdctc/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cdctc {

namespace {

constexpr double kLn10 = 2.302585092994045684;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> NGramLM::vocabulary() const {
  std::vector<int> v;
  for (int c = 1; c < base_size_; ++c) v.push_back(c);
  if (end_of_sentence_) v.push_back(end_token());
  return v;
}

double NGramLM::log_prob(std::span<const int> history, int word) const {
  const int n = static_cast<int>(history.size());
  if (n + 1 > order_) return log_prob(history.subspan(1), word);
  std::vector<int> key(history.begin(), history.end());
  key.push_back(word);
  const auto& table = probs_[n];
  if (auto it = table.find(key); it != table.end()) return it->second;
  if (n == 0)
    throw Error("n-gram LM: token " + std::to_string(word) + " is not in the vocabulary");
  std::vector<int> h(history.begin(), history.end());
  const auto bo = backoff_.find(h);
  const double weight = bo == backoff_.end() ? 0.0 : bo->second;
  return weight + log_prob(history.subspan(1), word);
}

// Histories are (order - 1)-tuples over {<s>, chars} with <s> coded as 0.
std::vector<int> NGramLM::history_tokens(int history) const {
  std::vector<int> h(order_ - 1);
  for (int i = order_ - 2; i >= 0; --i) {
    const int code = history % base_size_;
    history /= base_size_;
    h[i] = code == 0 ? start_token() : code;
  }
  return h;
}

int NGramLM::advance(int history, int word) const {
  if (order_ == 1) return 0;
  if (word <= 0 || word >= base_size_)
    throw Error("n-gram LM: cannot advance on token " + std::to_string(word));
  int span = 1;
  for (int i = 0; i < order_ - 2; ++i) span *= base_size_;
  return (history % span) * base_size_ + word;
}

void NGramLM::build_table() {
  num_histories_ = 1;
  for (int i = 0; i < order_ - 1; ++i) num_histories_ *= base_size_;
  table_.assign(static_cast<std::size_t>(num_histories_) * (base_size_ + 1),
                kLogZero<double>);
  const std::vector<int> vocab = vocabulary();
  for (int h = 0; h < num_histories_; ++h) {
    const std::vector<int> tokens = history_tokens(h);
    for (int w : vocab)
      table_[static_cast<std::size_t>(h) * (base_size_ + 1) + w] = log_prob(tokens, w);
  }
}

NGramLM train_char_lm(const std::vector<std::vector<int>>& corpus, int base_size,
                      int order, bool end_of_sentence) {
  if (order < 1 || order > 3) throw Error("n-gram LM: order must be 1, 2 or 3");
  if (base_size < 2) throw Error("n-gram LM: empty character set");
  if (corpus.empty()) throw Error("n-gram LM: empty training corpus");
  NGramLM lm;
  lm.order_ = order;
  lm.base_size_ = base_size;
  lm.end_of_sentence_ = end_of_sentence;
  lm.probs_.assign(order, {});
  const std::vector<int> vocab = lm.vocabulary();
  const double v = static_cast<double>(vocab.size());

  // counts[n][ngram] for n-grams of length n + 1; history totals per order.
  std::vector<std::map<std::vector<int>, double>> counts(order);
  std::vector<std::map<std::vector<int>, double>> totals(order);
  for (const auto& sentence : corpus) {
    std::vector<int> padded(order - 1, lm.start_token());
    for (int c : sentence) {
      if (c <= 0 || c >= base_size)
        throw Error("n-gram LM: training token " + std::to_string(c) + " out of range");
      padded.push_back(c);
    }
    if (end_of_sentence) padded.push_back(lm.end_token());
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      for (int n = 0; n < order; ++n) {
        std::vector<int> gram(padded.begin() + (i - n), padded.begin() + i + 1);
        counts[n][gram] += 1;
        gram.pop_back();
        totals[n][gram] += 1;
      }
    }
  }

  // Unigrams: add-one over the whole vocabulary.
  const double n1 = totals[0][{}];
  for (int w : vocab) {
    const auto it = counts[0].find({w});
    const double c = it == counts[0].end() ? 0.0 : it->second;
    lm.probs_[0][{w}] = std::log((c + 1.0) / (n1 + v));
  }
  for (int n = 1; n < order; ++n) {
    for (const auto& [gram, c] : counts[n]) {
      std::vector<int> h(gram.begin(), gram.end() - 1);
      lm.probs_[n][gram] = std::log((c + 1.0) / (totals[n][h] + v));
    }
    // Back-off weight: leftover mass over the lower-order mass of unseen words.
    for (const auto& [h, total] : totals[n]) {
      (void)total;
      double seen = 0, seen_lower = 0;
      for (int w : vocab) {
        std::vector<int> gram = h;
        gram.push_back(w);
        const auto it = lm.probs_[n].find(gram);
        if (it == lm.probs_[n].end()) continue;
        seen += std::exp(it->second);
        seen_lower += std::exp(lm.log_prob(std::span<const int>(h).subspan(1), w));
      }
      const double left = 1.0 - seen, left_lower = 1.0 - seen_lower;
      lm.backoff_[h] = left > 0 && left_lower > 0 ? std::log(left / left_lower) : 0.0;
    }
  }
  lm.build_table();
  return lm;
}

void NGramLM::write_arpa(std::ostream& os, const CdAlphabet& alphabet) const {
  auto word_name = [&](int token) -> std::string {
    if (token == end_token()) return "</s>";
    if (token == start_token()) return "<s>";
    return alphabet.base_name(token);
  };
  os << "\\data\\\n";
  os << "end-of-sentence=" << (end_of_sentence_ ? 1 : 0) << "\n";
  for (int n = 0; n < order_; ++n) {
    std::size_t count = probs_[n].size();
    if (n == 0 && order_ > 1) ++count;  // <s>
    os << "ngram " << n + 1 << "=" << count << "\n";
  }
  for (int n = 0; n < order_; ++n) {
    os << "\n\\" << n + 1 << "-grams:\n";
    auto write_line = [&](const std::vector<int>& gram, double logp) {
      os << (std::isinf(logp) ? std::string("-99") : format_double(logp / kLn10)) << "\t";
      for (std::size_t i = 0; i < gram.size(); ++i)
        os << (i ? " " : "") << word_name(gram[i]);
      if (n + 1 < order_) {
        const auto bo = backoff_.find(gram);
        os << "\t" << format_double(bo == backoff_.end() ? 0.0 : bo->second / kLn10);
      }
      os << "\n";
    };
    if (n == 0 && order_ > 1) write_line({start_token()}, kLogZero<double>);
    for (const auto& [gram, logp] : probs_[n]) write_line(gram, logp);
  }
  os << "\n\\end\\\n";
}

NGramLM NGramLM::read_arpa(std::istream& is, const CdAlphabet& alphabet) {
  NGramLM lm;
  lm.base_size_ = alphabet.base_size();
  auto token_of = [&](const std::string& w) {
    if (w == "</s>") return lm.end_token();
    if (w == "<s>") return lm.start_token();
    return alphabet.base_id(w);
  };
  std::string line;
  int section = -1;
  int order = 0;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "\\data\\") {
      header = true;
      continue;
    }
    if (line == "\\end\\") break;
    if (line.rfind("end-of-sentence=", 0) == 0) {
      lm.end_of_sentence_ = line.substr(16) == "1";
      continue;
    }
    if (line.rfind("ngram ", 0) == 0) {
      order = std::max(order, std::stoi(line.substr(6, line.find('=') - 6)));
      continue;
    }
    if (line.front() == '\\') {
      section = std::stoi(line.substr(1)) - 1;
      if (section < 0 || section >= order) throw Error("ARPA: bad section " + line);
      if (lm.probs_.empty()) lm.probs_.assign(order, {});
      continue;
    }
    if (!header || section < 0) throw Error("ARPA: unexpected line: " + line);
    std::istringstream fields(line);
    std::string logp_str, words, bo_str;
    std::getline(fields, logp_str, '\t');
    std::getline(fields, words, '\t');
    std::getline(fields, bo_str, '\t');
    std::vector<int> gram;
    std::istringstream ws(words);
    for (std::string w; ws >> w;) gram.push_back(token_of(w));
    if (static_cast<int>(gram.size()) != section + 1)
      throw Error("ARPA: wrong n-gram length: " + line);
    const double logp = std::stod(logp_str);
    if (logp > -99) lm.probs_[section][gram] = logp * kLn10;
    if (!bo_str.empty()) lm.backoff_[gram] = std::stod(bo_str) * kLn10;
  }
  if (order < 1 || order > 3) throw Error("ARPA: missing or unsupported order");
  lm.order_ = order;
  lm.build_table();
  return lm;
}

DecodeResult viterbi(const ScoreMatrix<double>& scores, const Fst& graph,
                     const DecodeConfig& config) {
  if (!(config.acoustic_weight > 0)) throw Error("viterbi: acoustic weight must be positive");
  const int T = static_cast<int>(scores.rows());
  const int S = graph.num_states();
  const NGramLM* lm = config.lm;
  const int H = lm ? lm->num_histories() : 1;
  const double kappa = config.acoustic_weight;
  const std::size_t width = static_cast<std::size_t>(S) * H;
  if (S == 0 || graph.start() < 0) throw Error("viterbi: empty graph");

  struct Back {
    int arc = -1;
    int history = 0;
  };
  std::vector<double> cur(width, kLogZero<double>), next(width);
  std::vector<std::vector<Back>> back(T, std::vector<Back>(width));
  cur[static_cast<std::size_t>(graph.start()) * H + (lm ? lm->initial_history() : 0)] = 0.0;
  const auto& arcs = graph.arcs();

  for (int t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), kLogZero<double>);
    auto& bp = back[t];
    for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
      const Arc& arc = arcs[a];
      const double acoustic = kappa * (scores(t, arc.ilabel) + arc.weight);
      if (acoustic == kLogZero<double>) continue;
      for (int h = 0; h < H; ++h) {
        const double prev = cur[static_cast<std::size_t>(arc.src) * H + h];
        if (prev == kLogZero<double>) continue;
        int nh = h;
        double lm_score = 0;
        if (lm && arc.olabel != kEpsilon) {
          lm_score = lm->log_prob(h, arc.olabel);
          nh = lm->advance(h, arc.olabel);
        }
        const double v = prev + acoustic + lm_score;
        const std::size_t k = static_cast<std::size_t>(arc.dst) * H + nh;
        if (v > next[k]) {
          next[k] = v;
          bp[k] = {a, h};
        }
      }
    }
    if (config.beam) {
      const double best = *std::max_element(next.begin(), next.end());
      for (double& v : next)
        if (v < best - *config.beam) v = kLogZero<double>;
    }
    std::swap(cur, next);
  }

  double best = kLogZero<double>;
  std::size_t best_k = width;
  for (int s = 0; s < S; ++s) {
    if (!graph.is_final(s)) continue;
    for (int h = 0; h < H; ++h) {
      const std::size_t k = static_cast<std::size_t>(s) * H + h;
      if (cur[k] == kLogZero<double>) continue;
      double v = cur[k] + kappa * graph.final_weight(s);
      if (lm && lm->models_end()) v += lm->log_prob(h, lm->end_token());
      if (v > best) {
        best = v;
        best_k = k;
      }
    }
  }
  if (best_k == width) throw Error("viterbi: no accepting path of length " + std::to_string(T));

  DecodeResult result;
  result.score = best;
  std::size_t k = best_k;
  for (int t = T - 1; t >= 0; --t) {
    const Back b = back[t][k];
    const Arc& arc = arcs[b.arc];
    if (arc.olabel != kEpsilon) result.transcript.push_back(arc.olabel);
    k = static_cast<std::size_t>(arc.src) * H + b.history;
  }
  std::reverse(result.transcript.begin(), result.transcript.end());
  return result;
}

std::size_t edit_distance(std::span<const int> hyp, std::span<const int> ref) {
  std::vector<std::size_t> row(ref.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diag + (hyp[i - 1] == ref[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[ref.size()];
}

double error_rate(std::span<const int> hyp, std::span<const int> ref) {
  const double d = static_cast<double>(edit_distance(hyp, ref));
  return d / static_cast<double>(std::max<std::size_t>(ref.size(), 1));
}

std::vector<SweepRow> sweep_scores(const std::string& loss_kind,
                                   const std::vector<ScoreMatrix<double>>& scores,
                                   const std::vector<std::vector<int>>& refs,
                                   const Fst& graph, const NGramLM* lm,
                                   std::span<const double> grid) {
  if (scores.size() != refs.size()) throw Error("sweep: scores and references differ in count");
  std::vector<SweepRow> rows;
  for (double kappa : grid) {
    DecodeConfig config;
    config.acoustic_weight = kappa;
    config.lm = lm;
    std::size_t edits = 0, length = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const DecodeResult r = viterbi(scores[i], graph, config);
      edits += edit_distance(r.transcript, refs[i]);
      length += refs[i].size();
    }
    rows.push_back({loss_kind, kappa,
                    static_cast<double>(edits) / static_cast<double>(std::max<std::size_t>(length, 1))});
  }
  return rows;
}

double argmin_kappa(std::span<const SweepRow> rows, const std::string& loss_kind) {
  const SweepRow* best = nullptr;
  for (const SweepRow& r : rows) {
    if (r.loss_kind != loss_kind) continue;
    if (!best || r.cer < best->cer || (r.cer == best->cer && r.kappa < best->kappa)) best = &r;
  }
  if (!best) throw Error("sweep: no rows for loss kind " + loss_kind);
  return best->kappa;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "loss_kind,kappa,cer\n";
  for (const SweepRow& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.6f", r.kappa, r.cer);
    os << r.loss_kind << "," << buf << "\n";
  }
}

}  // namespace cdctc
