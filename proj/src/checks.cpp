// cdctc/checks.cpp

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "cdctc/harness.hpp"
#include "cdctc/oracle.hpp"

namespace cdctc {

namespace {

struct OracleTopology {
  std::string name;
  CdAlphabet alphabet;
  Fst graph;
  int max_frames;
};

std::vector<OracleTopology> oracle_topologies() {
  const CdAlphabet ci = CdAlphabet::ci({"a", "b"});
  const CdAlphabet bi = CdAlphabet::bichar(ci, BlankMode::kSingle);
  const CdAlphabet bi_blank = CdAlphabet::bichar(ci, BlankMode::kContextDependent);
  std::vector<Triple> allowed;
  for (int l = 0; l < 3; ++l)
    for (int c = 1; c < 3; ++c)
      for (int r = 0; r < 3; ++r) allowed.push_back({l, c, r});
  const CdAlphabet tri = CdAlphabet::trichar(ci, allowed);
  // Tri-chars have 19 symbols; T = 4 keeps the enumeration small.
  return {{"ci", ci, decoding_graph(ci), 5},
          {"bichar", bi, decoding_graph(bi), 5},
          {"bichar-cdblank", bi_blank, decoding_graph(bi_blank), 5},
          {"trichar", tri, decoding_graph(tri), 4}};
}

std::set<std::vector<int>> trellis_set(const Fst& graph, int frames) {
  try {
    const auto strings = trellis_language(unroll(graph, frames));
    return {strings.begin(), strings.end()};
  } catch (const Error&) {
    return {};
  }
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_score_gradient(LossKind kind, const ScoreMatrix<double>& scores,
                                     const Trellis& numerator, const Fst& den_graph,
                                     const CdAlphabet& alphabet, double eps) {
  const LossResult<double> base = sequence_loss(kind, scores, numerator, den_graph, alphabet);
  GradCheckReport report;
  ScoreMatrix<double> s = scores;
  for (Eigen::Index t = 0; t < s.rows(); ++t) {
    for (int id : alphabet.usable_ids()) {
      const double keep = s(t, id);
      s(t, id) = keep + eps;
      const double plus = sequence_loss(kind, s, numerator, den_graph, alphabet).nll;
      s(t, id) = keep - eps;
      const double minus = sequence_loss(kind, s, numerator, den_graph, alphabet).nll;
      s(t, id) = keep;
      const double numeric = (plus - minus) / (2 * eps);
      report.max_rel_error =
          std::max(report.max_rel_error, relative_error(base.grad(t, id), numeric));
      ++report.checked;
    }
  }
  return report;
}

GradCheckReport check_model_gradient(const AcousticModel& model,
                                     std::span<const Utterance* const> batch,
                                     std::span<const Trellis* const> numerators,
                                     LossKind kind, const CdAlphabet& alphabet,
                                     const Fst& den_graph, double eps) {
  const BatchGradient analytic =
      compute_gradient(model, batch, numerators, kind, alphabet, den_graph);
  std::vector<std::span<const double>> grads;
  analytic.grad.for_each_block([&](const std::string&, const auto& block) {
    grads.emplace_back(block.data(), static_cast<std::size_t>(block.size()));
  });
  AcousticModel probe = model;
  std::vector<std::span<double>> params;
  probe.for_each_block([&](const std::string&, auto& block) {
    params.emplace_back(block.data(), static_cast<std::size_t>(block.size()));
  });
  auto loss = [&] {
    return compute_gradient(probe, batch, numerators, kind, alphabet, den_graph).loss;
  };
  GradCheckReport report;
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double keep = params[b][i];
      params[b][i] = keep + eps;
      const double plus = loss();
      params[b][i] = keep - eps;
      const double minus = loss();
      params[b][i] = keep;
      const double numeric = (plus - minus) / (2 * eps);
      report.max_rel_error = std::max(report.max_rel_error, relative_error(grads[b][i], numeric));
      ++report.checked;
    }
  }
  return report;
}

GradProblem make_grad_problem(LossKind kind, ScoringKind scoring, std::uint64_t seed) {
  ExperimentConfig config;
  config.topology = Topology::kBichar;
  config.loss = kind;
  config.scoring = scoring;
  config.blank_mode =
      kind == LossKind::kCtcGB ? BlankMode::kContextDependent : BlankMode::kSingle;
  config.model.d_feat = 3;
  config.model.window = 1;
  config.model.d_hidden = 5;
  config.model.d_proto = 4;
  config.model.d_emb = 3;
  config.model.cde_hidden = 5;

  Rng rng(seed);
  GradProblem p{make_task(config, {"a", "b", "c"}), {}, {}, {}};
  p.model = init_model(config.model, scoring, p.task.alphabet, seed + 1);
  // Offset biases so that ReLUs start active and finite differences see smooth
  // regions.
  p.model.encoder.b1.array() += 0.5;
  p.model.encoder.b2.array() += 0.5;
  if (scoring == ScoringKind::kCde) {
    p.model.cde.b1.array() += 0.5;
    p.model.cde.b2.array() += 0.5;
  }
  const std::vector<std::vector<int>> transcripts = {{1, 2, 2}, {3, 1}};
  for (const auto& y : transcripts) {
    Utterance u;
    u.transcript = y;
    u.features.resize(7, config.model.d_feat);
    for (Eigen::Index i = 0; i < u.features.size(); ++i) u.features.data()[i] = rng.normal();
    p.utterances.push_back(std::move(u));
  }
  for (const Utterance& u : p.utterances)
    p.numerators.push_back(
        unroll(numerator_graph(u.transcript, p.task.alphabet, numerator_kind(kind)),
               static_cast<int>(u.features.rows())));
  return p;
}

std::vector<OracleRow> oracle_check(std::uint64_t seed, std::size_t cases) {
  std::vector<OracleRow> rows;
  Rng rng(seed);
  const auto topologies = oracle_topologies();

  for (const OracleTopology& topo : topologies) {
    OracleRow row{"loss", topo.name, 0, 0.0, true};
    const bool cd_blank = topo.alphabet.blank_mode() == BlankMode::kContextDependent;
    for (std::size_t k = 0; k < cases; ++k) {
      const int T = rng.uniform_int(1, topo.max_frames);
      ScoreMatrix<double> scores(T, topo.alphabet.size());
      for (Eigen::Index i = 0; i < scores.size(); ++i) scores.data()[i] = 2.0 * rng.normal();
      std::vector<int> target(rng.uniform_int(1, std::min(T, 3)));
      for (int& c : target) c = rng.uniform_int(1, 2);
      const oracle::BruteLoss brute = oracle::brute_loss(scores, topo.alphabet, target);
      ++row.cases;
      if (std::isinf(brute.local_nll)) {
        // No realization: both losses must refuse the input.
        bool threw = false;
        try {
          ctc_local(scores, target, topo.alphabet);
        } catch (const Error&) {
          threw = true;
        }
        row.pass = row.pass && threw;
        continue;
      }
      const double local = ctc_local(scores, target, topo.alphabet).nll;
      row.max_error = std::max(row.max_error, std::abs(local - brute.local_nll));
      double global = 0;
      bool global_ok = true;
      try {
        global = cd_blank ? ctc_global_blank(scores, target, topo.alphabet, topo.graph).nll
                          : ctc_global(scores, target, topo.alphabet, topo.graph).nll;
      } catch (const Error&) {
        global_ok = std::isinf(brute.global_nll);
      }
      if (global_ok && !std::isinf(brute.global_nll))
        row.max_error = std::max(row.max_error, std::abs(global - brute.global_nll));
      row.pass = row.pass && global_ok;
    }
    row.pass = row.pass && row.max_error < 1e-9;
    rows.push_back(row);
  }

  for (const OracleTopology& topo : topologies) {
    if (topo.name == "trichar") continue;
    OracleRow row{"language", topo.name, 0, 0.0, true};
    const oracle::Validity validity =
        topo.alphabet.order() == 1 ? oracle::Validity::kNone
        : topo.alphabet.blank_mode() == BlankMode::kContextDependent ? oracle::Validity::kCdBlank
                                                                     : oracle::Validity::kOverlap;
    for (int T = 1; T <= 6; ++T) {
      std::map<std::vector<int>, std::set<std::vector<int>>> by_transcript;
      for (auto& s : oracle::enumerate({&topo.alphabet, T, validity, std::nullopt}))
        by_transcript[oracle::reduce(topo.alphabet, s)].insert(s);
      for (int n = 1; n <= 4; ++n) {
        for (int bits = 0; bits < (1 << n); ++bits) {
          std::vector<int> y(n);
          for (int i = 0; i < n; ++i) y[i] = 1 + ((bits >> (n - 1 - i)) & 1);
          const auto trellis =
              trellis_set(numerator_graph(y, topo.alphabet, NumeratorKind::kValid), T);
          const auto pattern = oracle::pattern_language(y, topo.alphabet, T);
          const auto& filtered = by_transcript[y];
          ++row.cases;
          row.pass = row.pass && trellis == pattern && pattern == filtered;
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_oracle_table(std::ostream& os, const std::vector<OracleRow>& rows) {
  os << "check\ttopology\tcases\tmax_error\tresult\n";
  for (const OracleRow& r : rows) {
    char err[32];
    if (r.check == "loss") std::snprintf(err, sizeof(err), "%.3g", r.max_error);
    else std::snprintf(err, sizeof(err), "-");
    os << r.check << "\t" << r.topology << "\t" << r.cases << "\t" << err << "\t"
       << (r.pass ? "pass" : "FAIL") << "\n";
  }
}

}  // namespace cdctc
