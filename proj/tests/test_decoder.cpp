// cdctc/tests/test_decoder.cpp

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

#include <cmath>
#include <sstream>

#include "cdctc/decoder.hpp"
#include "cdctc/graph.hpp"
#include "cdctc/loss.hpp"
#include "doctest.h"
#include "util.hpp"

using namespace cdctc;

namespace {

// Scores with `high` on the given label sequence and 0 elsewhere.
ScoreMatrix<double> peaked(const std::vector<int>& labels, int width, double high) {
  ScoreMatrix<double> s = ScoreMatrix<double>::Zero(static_cast<Eigen::Index>(labels.size()), width);
  for (std::size_t t = 0; t < labels.size(); ++t) s(static_cast<Eigen::Index>(t), labels[t]) = high;
  return s;
}

double lm_total(const NGramLM& lm, const std::vector<int>& y) {
  int h = lm.initial_history();
  double total = 0;
  for (int w : y) {
    total += lm.log_prob(h, w);
    h = lm.advance(h, w);
  }
  if (lm.models_end()) total += lm.log_prob(h, lm.end_token());
  return total;
}

NGramLM ab_lm(int order) {
  // b always follows a.
  return train_char_lm({{1, 2}, {1, 2, 1, 2}, {2, 1, 2}, {1, 2, 2}}, 3, order);
}

}  // namespace

TEST_CASE("add-one bigram estimates") {
  const NGramLM lm = train_char_lm({{1, 2}}, 3, 2);
  const double v = static_cast<double>(lm.vocabulary().size());
  CHECK(v == 3);  // a, b, </s>
  const std::vector<int> a{1};
  CHECK(std::exp(lm.log_prob(std::span<const int>(a), 2)) == doctest::Approx(2.0 / (1 + v)));
  CHECK(std::exp(lm.log_prob(lm.advance(lm.initial_history(), 1), 2)) == doctest::Approx(2.0 / (1 + v)));

  const NGramLM one = train_char_lm({{1, 1}, {1}}, 2, 2, false);
  for (int h = 0; h < one.num_histories(); ++h) CHECK(one.log_prob(h, 1) == doctest::Approx(0.0));

  CHECK_THROWS_AS(train_char_lm({}, 3, 2), Error);
  CHECK_THROWS_AS(train_char_lm({{3}}, 3, 2), Error);
  CHECK_THROWS_AS(train_char_lm({{1}}, 3, 4), Error);
}

TEST_CASE("conditionals sum to one for every history") {
  Rng rng(3);
  std::vector<std::vector<int>> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(test::random_transcript(rng.uniform_int(1, 6), 3, rng));
  for (int order : {1, 2, 3}) {
    for (bool eos : {true, false}) {
      const NGramLM lm = train_char_lm(corpus, 4, order, eos);
      for (int h = 0; h < lm.num_histories(); ++h) {
        double sum = 0;
        for (int w : lm.vocabulary()) sum += std::exp(lm.log_prob(h, w));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("arpa round-trip") {
  const CdAlphabet ci = test::ab();
  for (int order : {1, 2, 3}) {
    const NGramLM lm = ab_lm(order);
    std::ostringstream out;
    lm.write_arpa(out, ci);
    CHECK(out.str().rfind("\\data\\", 0) == 0);
    std::istringstream in(out.str());
    const NGramLM back = NGramLM::read_arpa(in, ci);
    CHECK(back.order() == order);
    CHECK(back.num_histories() == lm.num_histories());
    for (int h = 0; h < lm.num_histories(); ++h)
      for (int w : lm.vocabulary()) CHECK(std::abs(back.log_prob(h, w) - lm.log_prob(h, w)) < 1e-12);
    std::ostringstream again;
    back.write_arpa(again, ci);
    CHECK(again.str() == out.str());
  }
  std::istringstream junk("hello\n");
  CHECK_THROWS_AS(NGramLM::read_arpa(junk, ci), Error);
}

TEST_CASE("a huge acoustic weight reproduces LM-free decoding") {
  Rng rng(5);
  const CdAlphabet bi = CdAlphabet::bichar(test::ab(), BlankMode::kSingle);
  const Fst g = decoding_graph(bi);
  const NGramLM lm = ab_lm(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ScoreMatrix<double> s = log_softmax_usable(test::random_scores(6, bi.size(), rng, 2.0), bi);
    const auto free = viterbi(s, g, {});
    const auto heavy = viterbi(s, g, {1e6, std::nullopt, &lm});
    CHECK(heavy.transcript == free.transcript);
  }
}

TEST_CASE("one-hot scores along a valid alignment are recovered") {
  const CdAlphabet bi = CdAlphabet::bichar(test::ab(), BlankMode::kSingle);
  const NGramLM lm = ab_lm(2);
  const std::vector<int> path = test::ids(bi, {"∅a", "ab", "∅", "∅", "bb", "ba"});
  const std::vector<int> ref{1, 2, 2, 1};
  const ScoreMatrix<double> s = log_softmax_usable(peaked(path, bi.size(), 50.0), bi);
  for (double kappa : {0.2, 1.0, 5.0}) {
    CHECK(viterbi(s, decoding_graph(bi), {kappa, std::nullopt, &lm}).transcript == ref);
    CHECK(error_rate(viterbi(s, numerator_graph(ref, bi), {kappa, std::nullopt, nullptr}).transcript, ref) ==
          0.0);
  }
  CHECK_THROWS_AS(viterbi(s.topRows(3), numerator_graph(ref, bi), {}), Error);
  CHECK_THROWS_AS(viterbi(s, decoding_graph(bi), {0.0, std::nullopt, nullptr}), Error);
}

TEST_CASE("ties go to the lowest state, then the lowest arc") {
  // Two final states reached with equal scores.
  FstBuilder b;
  const int s0 = b.add_state(), s1 = b.add_state(), s2 = b.add_state();
  b.set_start(s0);
  b.add_arc(s0, s2, 2, 2);
  b.add_arc(s0, s1, 1, 1);
  b.set_final(s1);
  b.set_final(s2);
  const ScoreMatrix<double> flat = ScoreMatrix<double>::Zero(1, 3);
  CHECK(viterbi(flat, b.build(), {}).transcript == std::vector<int>{1});

  // Two arcs into the same state.
  FstBuilder c;
  const int t0 = c.add_state(), t1 = c.add_state();
  c.set_start(t0);
  c.add_arc(t0, t1, 1, 1);
  c.add_arc(t0, t1, 2, 2);
  c.set_final(t1);
  CHECK(viterbi(flat, c.build(), {}).transcript == std::vector<int>{1});
}

TEST_CASE("the best path's acoustic score does not drop as kappa grows") {
  Rng rng(9);
  const CdAlphabet bi = CdAlphabet::bichar(test::ab(), BlankMode::kSingle);
  const Fst g = decoding_graph(bi);
  const NGramLM lm = ab_lm(2);
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreMatrix<double> s = log_softmax_usable(test::random_scores(7, bi.size(), rng, 2.0), bi);
    double last = -std::numeric_limits<double>::infinity();
    for (double kappa : {0.1, 0.3, 1.0, 3.0, 10.0}) {
      const DecodeResult r = viterbi(s, g, {kappa, std::nullopt, &lm});
      const double acoustic = (r.score - lm_total(lm, r.transcript)) / kappa;
      CHECK(acoustic >= last - 1e-9);
      last = acoustic;
    }
  }
}

TEST_CASE("beam search matches exact search with a wide beam") {
  Rng rng(13);
  const CdAlphabet bi = CdAlphabet::bichar(test::ab(), BlankMode::kSingle);
  const Fst g = decoding_graph(bi);
  const NGramLM lm = ab_lm(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ScoreMatrix<double> s = log_softmax_usable(test::random_scores(8, bi.size(), rng), bi);
    const auto exact = viterbi(s, g, {1.0, std::nullopt, &lm});
    const auto beamed = viterbi(s, g, {1.0, 1e3, &lm});
    CHECK(beamed.transcript == exact.transcript);
    CHECK(beamed.score == exact.score);
  }
}

TEST_CASE("character error rate") {
  const std::vector<int> ab{1, 2}, b{2}, empty;
  CHECK(error_rate(ab, ab) == 0.0);
  CHECK(error_rate(b, ab) == 0.5);
  CHECK(error_rate(empty, ab) == 1.0);
  CHECK(edit_distance(std::vector<int>{1, 3, 2, 2}, ab) == 2);
  CHECK(edit_distance(ab, empty) == 2);
  CHECK(error_rate(ab, empty) == 2.0);
}

TEST_CASE("kappa sweep") {
  Rng rng(17);
  const CdAlphabet ci = test::ab();
  const Fst g = decoding_graph(ci);
  const NGramLM lm = train_char_lm({{1, 2}, {1, 2, 1, 2}, {1, 2, 1, 2, 1, 2}}, 3, 2);
  // Noisy acoustics around "abab"-style references; the LM knows the pattern.
  std::vector<ScoreMatrix<double>> scores;
  std::vector<std::vector<int>> refs;
  for (int i = 0; i < 30; ++i) {
    std::vector<int> ref;
    const int n = rng.uniform_int(1, 3);
    for (int k = 0; k < n; ++k) ref.insert(ref.end(), {1, 2});
    std::vector<int> frames;
    for (int c : ref) frames.insert(frames.end(), {c, c, 0});
    ScoreMatrix<double> s = peaked(frames, 3, 1.0) + test::random_scores(static_cast<int>(frames.size()), 3, rng, 0.8);
    scores.push_back(log_softmax_usable(s, ci));
    refs.push_back(ref);
  }
  const std::vector<double> one{1.0};
  const auto single = sweep_scores("ctc", scores, refs, g, &lm, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].kappa == 1.0);

  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  const auto rows = sweep_scores("ctc", scores, refs, g, &lm, grid);
  CHECK(rows.size() == grid.size());
  CHECK(sweep_scores("ctc", scores, refs, g, &lm, grid).front().cer == rows.front().cer);
  const std::vector<double> huge{1e6};
  const double no_lm = sweep_scores("ctc", scores, refs, g, &lm, huge)[0].cer;
  double best = 1e9;
  for (const auto& r : rows) best = std::min(best, r.cer);
  CHECK(best <= no_lm);
  const double k = argmin_kappa(rows, "ctc");
  for (const auto& r : rows) {
    if (r.kappa < k) CHECK(r.cer > best);
  }

  const std::vector<SweepRow> tied{{"x", 1.4, 0.1}, {"x", 0.6, 0.1}, {"x", 1.0, 0.2}, {"y", 0.2, 0.0}};
  CHECK(argmin_kappa(tied, "x") == 0.6);
  CHECK_THROWS_AS(argmin_kappa(tied, "z"), Error);
  std::ostringstream csv;
  write_sweep_csv(csv, tied);
  CHECK(csv.str().rfind("loss_kind,kappa,cer\nx,1.40,0.100000\n", 0) == 0);
}
