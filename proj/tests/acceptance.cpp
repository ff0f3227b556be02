// cdctc/tests/acceptance.cpp

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

// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdctc/cde.hpp"
#include "cdctc/harness.hpp"
#include "cdctc/loss.hpp"
#include "cdctc/oracle.hpp"

using namespace cdctc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

CdAlphabet ab() { return CdAlphabet::ci({"a", "b"}); }

// 1. Brute-force agreement of both losses on every small topology.
Outcome oracle_losses() {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = oracle_check(2024, 100);
  const double elapsed = seconds_since(start);
  bool ok = elapsed < 30;
  double worst = 0;
  std::size_t topologies = 0;
  for (const OracleRow& r : rows) {
    if (r.check != "loss") continue;
    ++topologies;
    ok = ok && r.pass && r.cases >= 100 && r.max_error < 1e-9;
    worst = std::max(worst, r.max_error);
  }
  ok = ok && topologies == 4;
  return {ok, std::to_string(topologies) + " topologies x 100 cases, max |nll - brute| " +
                  fmt("%.2e", worst) + ", " + fmt("%.1f", elapsed) + " s"};
}

// 2. Globally normalized CTC over row-softmaxed CI scores is local CTC.
Outcome ci_reduction() {
  Rng rng(7);
  double worst = 0;
  const std::vector<CdAlphabet> alphabets{ab(), CdAlphabet::ci({"a", "b", "c"})};
  int cases = 0;
  for (const CdAlphabet& ci : alphabets) {
    const Fst den = decoding_graph(ci);
    for (int k = 0; k < 100; ++k, ++cases) {
      const int T = rng.uniform_int(1, 6);
      ScoreMatrix<double> s(T, ci.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = 3.0 * rng.normal();
      std::vector<int> y(rng.uniform_int(1, (T + 1) / 2));
      for (int& c : y) c = rng.uniform_int(1, ci.base_size() - 1);
      const double local = ctc_local(s, std::span<const int>(y), ci).nll;
      const double global = ctc_global(log_softmax_usable(s, ci), std::span<const int>(y), ci, den).nll;
      worst = std::max(worst, std::abs(local - global));
    }
  }
  return {worst < 1e-9, std::to_string(cases) + " cases, max |global - local| " + fmt("%.2e", worst)};
}

// 3. Trellis, pattern and filtered-enumeration languages coincide.
Outcome language_equivalence() {
  bool ok = true;
  std::size_t rows = 0;
  for (const OracleRow& r : oracle_check(3, 1)) {
    if (r.check != "language") continue;
    ++rows;
    ok = ok && r.pass;
  }
  ok = ok && rows == 3;
  const CdAlphabet ci = ab();
  const CdAlphabet bi = CdAlphabet::bichar(ci, BlankMode::kSingle);
  const std::vector<int> abba{1, 2, 2, 1};
  bool ci_mandatory = true, bi_optional = false;
  for (int T = 5; T <= 6; ++T) {
    for (const auto& s : oracle::pattern_language(abba, ci, T)) {
      const auto first = std::find(s.begin(), s.end(), 2);
      const auto last = std::find(s.rbegin(), s.rend(), 2).base() - 1;
      ci_mandatory = ci_mandatory && std::find(first, last, kBlank) != last;
    }
    for (const auto& s : oracle::pattern_language(abba, bi, T))
      bi_optional = bi_optional || std::find(s.begin(), s.end(), kBlank) == s.end();
  }
  ok = ok && ci_mandatory && bi_optional;
  return {ok, std::to_string(rows) + " topologies three-way equal; blank between b's mandatory in ci: " +
                  (ci_mandatory ? "yes" : "no") + ", optional in bichar: " + (bi_optional ? "yes" : "no")};
}

// 4. State count of the two-letter bi-char graph.
Outcome nine_states() {
  const int states = cd_decoding_graph(CdAlphabet::bichar(ab(), BlankMode::kSingle)).num_states();
  return {states == 9, "bichar graph over {a, b} has " + std::to_string(states) + " states"};
}

// 5. Finite-difference gradient checks.
Outcome gradients() {
  Rng rng(11);
  double loss_worst = 0, cde_worst = 0, e2e_worst = 0;
  for (LossKind kind : {LossKind::kCtc, LossKind::kCtcG, LossKind::kCtcGB}) {
    for (ScoringKind scoring : {ScoringKind::kLookup, ScoringKind::kCde}) {
      const GradProblem p = make_grad_problem(kind, scoring, 5);
      std::vector<const Utterance*> batch;
      std::vector<const Trellis*> nums;
      for (std::size_t i = 0; i < p.utterances.size(); ++i) {
        batch.push_back(&p.utterances[i]);
        nums.push_back(&p.numerators[i]);
        ScoreMatrix<double> s(p.utterances[i].features.rows(), p.task.alphabet.size());
        for (Eigen::Index k = 0; k < s.size(); ++k) s.data()[k] = rng.normal();
        loss_worst = std::max(loss_worst, check_score_gradient(kind, s, p.numerators[i], p.task.graph,
                                                               p.task.alphabet).max_rel_error);
      }
      e2e_worst = std::max(e2e_worst, check_model_gradient(p.model, batch, nums, kind, p.task.alphabet,
                                                           p.task.graph).max_rel_error);
    }
  }
  // CDE blocks against a random linear read-out of the prototypes.
  for (int order : {1, 2, 3}) {
    CdeConfig cc{order, 4, 3, 6, 5};
    CdeParams params = init_cde(cc, rng);
    std::vector<CdSymbol> symbols;
    for (int l = 0; l < 4; ++l)
      for (int c = 0; c < 4; ++c) symbols.push_back({l, c, (l + c) % 4, c == 0, 0});
    Eigen::MatrixXd u(static_cast<Eigen::Index>(symbols.size()), cc.d_proto);
    for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = rng.normal();
    CdeParams grad = cde_backward(params, symbols, u);
    std::vector<std::pair<double*, Eigen::Index>> p, g;
    params.for_each_block([&](const std::string&, auto& b) { p.emplace_back(b.data(), b.size()); });
    grad.for_each_block([&](const std::string&, auto& b) { g.emplace_back(b.data(), b.size()); });
    const double eps = 1e-5;
    for (std::size_t b = 0; b < p.size(); ++b) {
      for (Eigen::Index i = 0; i < p[b].second; ++i) {
        double& x = p[b].first[i];
        const double keep = x;
        x = keep + eps;
        const double up = cde_forward(params, symbols).rows.cwiseProduct(u).sum();
        x = keep - eps;
        const double down = cde_forward(params, symbols).rows.cwiseProduct(u).sum();
        x = keep;
        cde_worst = std::max(cde_worst, relative_error(g[b].first[i], (up - down) / (2 * eps)));
      }
    }
  }
  const bool ok = loss_worst < 1e-5 && cde_worst < 1e-5 && e2e_worst < 1e-4;
  return {ok, "max rel error: losses " + fmt("%.2e", loss_worst) + ", cde " + fmt("%.2e", cde_worst) +
                  ", end-to-end " + fmt("%.2e", e2e_worst)};
}

std::vector<Triple> first_triples(int base_size, std::size_t count) {
  std::vector<Triple> out;
  for (int c = 1; c < base_size && out.size() < count; ++c)
    for (int l = 0; l < base_size && out.size() < count; ++l)
      for (int r = 0; r < base_size && out.size() < count; ++r) out.push_back({l, c, r});
  return out;
}

CdAlphabet letters() {
  std::vector<std::string> chars;
  for (char ch = 'a'; ch <= 'z'; ++ch) chars.emplace_back(1, ch);
  return CdAlphabet::ci(chars);
}

// 6. Look-up prototypes scale with the symbol count, CDE parameters do not.
Outcome parameter_scaling() {
  const std::size_t lookup = param_count(LookupConfig{17000, 320});
  const CdAlphabet base = letters();
  const CdAlphabet small = CdAlphabet::trichar(base, first_triples(base.base_size(), 100));
  const CdAlphabet large = CdAlphabet::trichar(base, first_triples(base.base_size(), 17000));
  ModelConfig mc;
  const std::size_t cde_small = init_model(mc, ScoringKind::kCde, small, 1).num_parameters();
  const std::size_t cde_large = init_model(mc, ScoringKind::kCde, large, 1).num_parameters();
  const std::size_t lut_small = init_model(mc, ScoringKind::kLookup, small, 1).num_parameters();
  const std::size_t lut_large = init_model(mc, ScoringKind::kLookup, large, 1).num_parameters();
  const bool ok = lookup == 5'440'000 && cde_small == cde_large && lut_large > lut_small &&
                  param_count(CdeConfig{3, base.base_size(), 110, 320, 320}) ==
                      param_count(CdeConfig{3, base.base_size(), 110, 320, 320});
  return {ok, "look-up 17000 x 320 = " + std::to_string(lookup) + "; model with cde: " +
                  std::to_string(cde_small) + " params at " + std::to_string(small.usable_ids().size()) +
                  " symbols, " + std::to_string(cde_large) + " at " + std::to_string(large.usable_ids().size()) +
                  "; look-up model: " + std::to_string(lut_small) + " vs " + std::to_string(lut_large)};
}

// 7. A tri-char never seen in training is scored through CDE but not by look-up.
Outcome unseen_context() {
  const CdAlphabet base = ab();
  const std::vector<Triple> seen{{0, 1, 2}, {1, 2, 0}, {0, 2, 0}, {0, 1, 0}};
  const CdAlphabet train = CdAlphabet::trichar(base, seen);
  std::vector<Triple> wider = seen;
  wider.push_back({0, 2, 1});  // "b" before "a" at the start
  wider.push_back({2, 1, 0});
  const CdAlphabet test = CdAlphabet::trichar(base, wider);
  ModelConfig mc;
  const AcousticModel cde = init_model(mc, ScoringKind::kCde, train, 3);
  const AcousticModel lookup = init_model(mc, ScoringKind::kLookup, train, 3);
  Rng rng(3);
  Eigen::MatrixXd feats(6, mc.d_feat);
  for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.normal();
  const std::vector<int> ba{2, 1};
  double nll = std::numeric_limits<double>::quiet_NaN();
  std::string cde_error;
  try {
    nll = ctc_global(cde.scores(feats, test), std::span<const int>(ba), test, decoding_graph(test)).nll;
  } catch (const Error& e) {
    cde_error = e.what();
  }
  bool lookup_threw = false;
  try {
    lookup.scores(feats, test);
  } catch (const Error&) {
    lookup_threw = true;
  }
  const bool ok = cde_error.empty() && std::isfinite(nll) && lookup_threw;
  return {ok, "held-out (∅,b,a): cde loss " + (cde_error.empty() ? fmt("%.4f", nll) : cde_error) +
                  ", look-up " + (lookup_threw ? "raises" : "does not raise")};
}

struct SeedRuns {
  double ci_test = 0, bc_test = 0, bg_test = 0;
  double bc_kappa = 0, bg_kappa = 0;
};

SeedRuns run_seed(std::uint64_t seed) {
  ExperimentConfig base = read_config(std::string(CDCTC_CONFIG_DIR) + "/coarticulation.cfg");
  set_seed(base, seed);
  const Dataset data = synth(base.synth);
  SeedRuns out;
  auto train = [&](Topology topo, LossKind loss, double* test_cer, double* kappa) {
    ExperimentConfig c = base;
    c.topology = topo;
    c.loss = loss;
    const ExperimentResult r = run_experiment(c, data);
    *test_cer = r.test_cer;
    if (kappa) {
      const Task task = make_task(c, data.chars);
      const auto rows = sweep(r.model, c, task, data, r.lm, c.kappa_grid);
      *kappa = argmin_kappa(rows, std::string(loss_kind_name(loss)));
    }
  };
  train(Topology::kCi, LossKind::kCtc, &out.ci_test, nullptr);
  train(Topology::kBichar, LossKind::kCtc, &out.bc_test, &out.bc_kappa);
  train(Topology::kBichar, LossKind::kCtcG, &out.bg_test, &out.bg_kappa);
  return out;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd =
      std::string("'") + CDCTC_CLI + "' " + args + " > '" + stdout_file.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  if (files.empty()) return false;
  for (const fs::path& f : files)
    if (!fs::exists(b / f) || slurp(a / f) != slurp(b / f)) return false;
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  return count_b == files.size();
}

// 10. Byte-identical outputs for repeated CLI runs.
Outcome determinism() {
  const fs::path root = fs::path(CDCTC_WORK_DIR) / "acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "ab.txt") << "a\nb\n";
    std::ofstream(root / "run.cfg") << "samples = 60\nsteps = 40\neval_every = 20\n";
  }
  const std::string cfg = " --config '" + (root / "run.cfg").string() + "' --seed 5";
  const std::vector<std::pair<std::string, std::function<std::string(const fs::path&)>>> commands{
      {"build-graph", [&](const fs::path& d) {
         return "build-graph --topology bichar --alphabet '" + (root / "ab.txt").string() + "' --out '" + d.string() + "'";
       }},
      {"synth", [&](const fs::path& d) { return "synth" + cfg + " --out '" + d.string() + "'"; }},
      {"train", [&](const fs::path& d) { return "train" + cfg + " --out '" + d.string() + "'"; }},
      {"decode", [&](const fs::path& d) {
         return "decode" + cfg + " --checkpoint '" + (root / "train1" / "model.ckpt").string() + "' --out '" +
                d.string() + "'";
       }},
      {"sweep", [&](const fs::path& d) {
         return "sweep --run '" + (root / "train1").string() + "' --out '" + d.string() + "'";
       }},
      {"grad-check", [&](const fs::path& d) { return "grad-check --loss ctc-gb --out '" + d.string() + "'"; }},
      {"oracle-check", [&](const fs::path& d) { return "oracle-check --cases 20 --out '" + d.string() + "'"; }},
  };
  bool ok = true;
  std::string failed;
  for (const auto& [name, make] : commands) {
    bool same = true;
    for (int k = 1; k <= 2; ++k) {
      const fs::path d = root / (name + std::to_string(k));
      same = same && run_cli(make(d), root / (name + std::to_string(k) + ".stdout")) == 0;
    }
    same = same && same_tree(root / (name + "1"), root / (name + "2")) &&
           slurp(root / (name + "1.stdout")) == slurp(root / (name + "2.stdout"));
    if (!same) failed += " " + name;
    ok = ok && same;
  }
  return {ok, ok ? "7 subcommands byte-identical across two runs" : "differs or failed:" + failed};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence of losses", oracle_losses},
      {"ci reduction", ci_reduction},
      {"language equivalence", language_equivalence},
      {"nine-state bi-char graph", nine_states},
      {"gradient checks", gradients},
      {"parameter scaling", parameter_scaling},
      {"unseen-context generalization", unseen_context},
  };

  std::vector<Outcome> outcomes;
  std::vector<std::string> names;
  for (auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    names.push_back(name);
    outcomes.push_back(o);
  }

  // Criteria 8 and 9 share five paired-seed training runs.
  Outcome fig3, table1;
  try {
    const auto start = std::chrono::steady_clock::now();
    int kappa_hits = 0, bc_hits = 0, bg_hits = 0;
    std::ostringstream kappas, cers;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SeedRuns r = run_seed(seed);
      kappa_hits += r.bg_kappa >= r.bc_kappa;
      bc_hits += r.bc_test <= r.ci_test;
      bg_hits += r.bg_test <= r.ci_test;
      kappas << " s" << seed << " " << fmt("%.1f", r.bc_kappa) << "/" << fmt("%.1f", r.bg_kappa);
      cers << " s" << seed << " " << fmt("%.3f", r.ci_test) << "/" << fmt("%.3f", r.bc_test) << "/"
           << fmt("%.3f", r.bg_test);
      std::cerr << "seed " << seed << " done (" << fmt("%.0f", seconds_since(start)) << " s)\n";
    }
    const double elapsed = seconds_since(start);
    fig3 = {kappa_hits >= 4 && elapsed < 600,
            std::to_string(kappa_hits) + "/5 seeds with argmin-kappa ctc-g >= ctc (ctc/ctc-g:" + kappas.str() +
                "), " + fmt("%.0f", elapsed) + " s"};
    table1 = {bc_hits >= 4 && bg_hits >= 4,
              "test CER <= ci ctc: bichar ctc " + std::to_string(bc_hits) + "/5, bichar ctc-g " +
                  std::to_string(bg_hits) + "/5 (ci/ctc/ctc-g:" + cers.str() + ")"};
  } catch (const std::exception& e) {
    fig3 = table1 = {false, std::string("exception: ") + e.what()};
  }
  names.push_back("acoustic-weight ordering");
  outcomes.push_back(fig3);
  names.push_back("context-dependent gain");
  outcomes.push_back(table1);

  Outcome det;
  try {
    det = determinism();
  } catch (const std::exception& e) {
    det = {false, std::string("exception: ") + e.what()};
  }
  names.push_back("determinism");
  outcomes.push_back(det);

  int failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    std::printf("[%s] %zu. %s: %s\n", outcomes[i].pass ? "PASS" : "FAIL", i + 1, names[i].c_str(),
                outcomes[i].detail.c_str());
    failures += !outcomes[i].pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(outcomes.size()) - failures, outcomes.size());
  return failures == 0 ? 0 : 1;
}
