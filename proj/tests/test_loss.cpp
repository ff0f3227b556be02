// cdctc/tests/test_loss.cpp

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

#include "cdctc/harness.hpp"
#include "cdctc/loss.hpp"
#include "cdctc/oracle.hpp"
#include "doctest.h"
#include "util.hpp"

using namespace cdctc;
using cdctc::test::ids;

namespace {

const CdAlphabet& ci() {
  static const CdAlphabet a = test::ab();
  return a;
}
const CdAlphabet& bichar() {
  static const CdAlphabet a = CdAlphabet::bichar(ci(), BlankMode::kSingle);
  return a;
}
const CdAlphabet& cd_blank() {
  static const CdAlphabet a = CdAlphabet::bichar(ci(), BlankMode::kContextDependent);
  return a;
}

LossResult<double> run(LossKind kind, const ScoreMatrix<double>& s, const std::vector<int>& y,
                       const CdAlphabet& a) {
  const Trellis num = unroll(numerator_graph(y, a, numerator_kind(kind)), static_cast<int>(s.rows()));
  return sequence_loss(kind, s, num, decoding_graph(a), a);
}

double max_fd_error(LossKind kind, ScoreMatrix<double> s, const std::vector<int>& y,
                    const CdAlphabet& a) {
  const double eps = 1e-5;
  const LossResult<double> base = run(kind, s, y, a);
  double worst = 0;
  for (int id : a.usable_ids()) {
    for (Eigen::Index t = 0; t < s.rows(); ++t) {
      const double keep = s(t, id);
      s(t, id) = keep + eps;
      const double up = run(kind, s, y, a).nll;
      s(t, id) = keep - eps;
      const double down = run(kind, s, y, a).nll;
      s(t, id) = keep;
      worst = std::max(worst, relative_error(base.grad(t, id), (up - down) / (2 * eps)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("local ctc examples") {
  const std::vector<int> a{1};
  const auto one = ctc_local(ScoreMatrix<double>::Zero(1, 3).eval(), std::span<const int>(a), ci());
  CHECK(one.nll == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const auto two = ctc_local(ScoreMatrix<double>::Zero(2, 3).eval(), std::span<const int>(a), ci());
  CHECK(two.nll == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const std::vector<int> aba{1, 2, 1};
  CHECK_THROWS_AS(ctc_local(ScoreMatrix<double>::Zero(2, 3).eval(), std::span<const int>(aba), ci()),
                  Error);
}

TEST_CASE("global ctc examples") {
  const std::vector<int> a{1};
  const Fst den = ci_decoding_graph(ci());
  const auto r = ctc_global(ScoreMatrix<double>::Zero(2, 3).eval(), std::span<const int>(a), ci(), den);
  CHECK(r.nll == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const std::vector<int> abba{1, 2, 2, 1};
  for (const CdAlphabet* alpha : {&bichar(), &cd_blank()}) {
    const Trellis t4 = unroll(numerator_graph(abba, *alpha), 4);
    CHECK(path_count(t4) == 1);
    CHECK(trellis_language(t4).front() == ids(*alpha, {"∅a", "ab", "bb", "ba"}));
  }
  for (int T = 5; T <= 7; ++T) {
    const Trellis t = unroll(numerator_graph(abba, cd_blank()), T);
    CHECK(path_count(t) == doctest::Approx(double(oracle::pattern_language(abba, cd_blank(), T).size())));
  }

  CHECK_THROWS_AS(ctc_global_blank(ScoreMatrix<double>::Zero(4, 9).eval(), std::span<const int>(abba),
                                   bichar(), decoding_graph(bichar())),
                  Error);
}

TEST_CASE("losses agree with brute-force enumeration") {
  Rng rng(41);
  for (const CdAlphabet* alpha : {&ci(), &bichar(), &cd_blank()}) {
    for (int trial = 0; trial < 12; ++trial) {
      const int T = rng.uniform_int(2, 5);
      const auto y = test::random_transcript(rng.uniform_int(1, 2), 2, rng);
      const ScoreMatrix<double> s = test::random_scores(T, alpha->size(), rng, 2.0);
      const auto brute = oracle::brute_loss(s, *alpha, y);
      if (!std::isfinite(brute.global_nll)) continue;
      CHECK(std::abs(run(LossKind::kCtc, s, y, *alpha).nll - brute.local_nll) < 1e-9);
      const LossKind g = alpha == &cd_blank() ? LossKind::kCtcGB : LossKind::kCtcG;
      const double global = run(g, s, y, *alpha).nll;
      CHECK(std::abs(global - brute.global_nll) < 1e-9);
      CHECK(global >= -1e-12);
    }
  }
  // Bi-char, T = 2, "ab".
  Rng r2(2);
  const std::vector<int> ab{1, 2};
  const ScoreMatrix<double> s = test::random_scores(2, bichar().size(), r2);
  CHECK(std::abs(run(LossKind::kCtc, s, ab, bichar()).nll - oracle::brute_loss(s, bichar(), ab).local_nll) <
        1e-9);
}

TEST_CASE("global ctc reduces to local ctc on the ci topology") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int T = rng.uniform_int(1, 6);
    const auto y = test::random_transcript(rng.uniform_int(1, (T + 1) / 2), 2, rng);
    const ScoreMatrix<double> s = test::random_scores(T, 3, rng, 3.0);
    const auto local = run(LossKind::kCtc, s, y, ci());
    const auto global = run(LossKind::kCtcG, log_softmax_usable(s, ci()), y, ci());
    CHECK(std::abs(local.nll - global.nll) < 1e-9);
  }
}

TEST_CASE("local ctc gradient rows sum to zero") {
  Rng rng(47);
  for (const CdAlphabet* alpha : {&ci(), &bichar(), &cd_blank()}) {
    for (int trial = 0; trial < 5; ++trial) {
      const int T = rng.uniform_int(3, 8);
      const auto y = test::random_transcript(rng.uniform_int(1, 2), 2, rng);
      const auto r = run(LossKind::kCtc, test::random_scores(T, alpha->size(), rng), y, *alpha);
      CHECK(r.nll >= 0);
      for (int t = 0; t < T; ++t) CHECK(std::abs(r.grad.row(t).sum()) < 1e-9);
    }
  }
}

TEST_CASE("local numerator admits an invalid string the global numerator excludes") {
  // [∅a, ∅∅, ab]: a context-free blank after "a" is invalid with CD blanks.
  const std::vector<int> bad = ids(cd_blank(), {"∅a", "∅∅", "ab"});
  CHECK_FALSE(oracle::valid_by_definition(cd_blank(), bad));
  ScoreMatrix<double> s = ScoreMatrix<double>::Zero(3, cd_blank().size());
  for (int t = 0; t < 3; ++t) s(t, bad[t]) = 12.0;
  const std::vector<int> ab{1, 2};
  const auto brute = oracle::brute_loss(s, cd_blank(), ab);
  const double local = run(LossKind::kCtc, s, ab, cd_blank()).nll;
  const double global_num =
      -log_forward(unroll(numerator_graph(ab, cd_blank()), 3), log_softmax_usable(s, cd_blank()));
  CHECK(std::abs(local - brute.local_nll) < 1e-9);
  CHECK(local < 0.01);
  CHECK(global_num > 5.0);
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(53);
  struct Case {
    LossKind kind;
    const CdAlphabet* alphabet;
  };
  for (const Case c : {Case{LossKind::kCtc, &ci()}, Case{LossKind::kCtc, &bichar()},
                       Case{LossKind::kCtc, &cd_blank()}, Case{LossKind::kCtcG, &ci()},
                       Case{LossKind::kCtcG, &bichar()}, Case{LossKind::kCtcGB, &cd_blank()}}) {
    for (int trial = 0; trial < 3; ++trial) {
      const int T = rng.uniform_int(3, 5);
      const auto y = test::random_transcript(rng.uniform_int(1, 2), 2, rng);
      CHECK(max_fd_error(c.kind, test::random_scores(T, c.alphabet->size(), rng), y, *c.alphabet) <
            1e-5);
    }
  }
}

TEST_CASE("loss input validation") {
  const std::vector<int> a{1};
  CHECK_THROWS_AS(ctc_local(ScoreMatrix<double>::Zero(2, 4).eval(), std::span<const int>(a), ci()), Error);
  ScoreMatrix<double> s = ScoreMatrix<double>::Zero(2, 3);
  s(1, 1) = std::nan("");
  CHECK_THROWS_AS(ctc_local(s, std::span<const int>(a), ci()), Error);
  CHECK(parse_loss_kind("ctc-gb") == LossKind::kCtcGB);
  CHECK(loss_kind_name(LossKind::kCtcG) == "ctc-g");
  CHECK_THROWS_AS(parse_loss_kind("mmi"), Error);
}
