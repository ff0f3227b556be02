// cdctc/tools/cdctc.cpp

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

// Command-line driver. Exit status: 0 success, 1 a check failed, 2 bad usage
// or invalid input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cdctc/checkpoint.hpp"
#include "cdctc/decoder.hpp"
#include "cdctc/harness.hpp"
#include "cdctc/oracle.hpp"

namespace fs = std::filesystem;
using namespace cdctc;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool need_config) {
  auto* opt = app->add_option("--config", c.config, "flat key = value experiment config");
  if (need_config) opt->required();
  app->add_option("--seed", c.seed, "override the data and model seeds");
  app->add_option("--out", c.out, "output directory");
}

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig config = c.config.empty() ? ExperimentConfig{} : read_config(c.config);
  if (c.seed) set_seed(config, *c.seed);
  validate(config);
  return config;
}

// Writes `text` to out/name when an output directory is set, else to stdout.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(c.out);
  std::ofstream os(fs::path(c.out) / name, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + (fs::path(c.out) / name).string());
}

std::string format_fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

AcousticModel load_model(const ExperimentConfig& config, const Task& task,
                         const std::string& checkpoint) {
  AcousticModel model = init_model(config.model, config.scoring, task.alphabet, config.seed);
  model.load_tensors(read_checkpoint(checkpoint));
  return model;
}

NGramLM load_lm(const std::string& path, const Task& task) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open LM " + path);
  return NGramLM::read_arpa(is, task.alphabet);
}

int cmd_build_graph(const std::string& topology, const std::string& alphabet_file,
                    const std::string& allowed, const std::string& blank_mode,
                    const Common& c) {
  const CdAlphabet base = CdAlphabet::ci(read_alphabet_file(alphabet_file));
  const Topology topo = parse_topology(topology);
  if (blank_mode != "single" && blank_mode != "cd")
    throw Error("--blank-mode must be single or cd");
  const BlankMode mode = blank_mode == "cd" ? BlankMode::kContextDependent : BlankMode::kSingle;
  if (mode == BlankMode::kContextDependent && topo != Topology::kBichar)
    throw Error("--blank-mode cd is only defined for --topology bichar");
  if (topo == Topology::kTrichar && allowed.empty())
    throw Error("--topology trichar requires --allowed");
  const CdAlphabet alphabet =
      topo == Topology::kCi       ? base
      : topo == Topology::kBichar ? CdAlphabet::bichar(base, mode)
                                  : CdAlphabet::trichar(base, read_allowed_file(allowed, base));
  const Fst graph = decoding_graph(alphabet);
  std::ostringstream text;
  write_fst_text(text, graph);
  emit(c, "graph.fst", text.str());
  std::ostringstream summary;
  summary << "states " << graph.num_states() << "\narcs " << graph.num_arcs() << "\n";
  if (c.out.empty()) std::cerr << summary.str();
  else emit(c, "graph.summary", summary.str());
  return kOk;
}

int cmd_synth(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const Dataset data = synth(config.synth);
  std::ostringstream text;
  write_dataset(text, data);
  emit(c, "data.txt", text.str());
  if (c.out.empty()) return kOk;
  std::ostringstream chars;
  for (const auto& ch : data.chars) chars << ch << "\n";
  emit(c, "chars.txt", chars.str());
  // Every tri-char occurring in the training split.
  const Split split = split_dataset(data);
  std::set<Triple> seen;
  for (const Utterance* u : split.train) {
    const auto& y = u->transcript;
    for (std::size_t i = 0; i < y.size(); ++i)
      seen.insert({i > 0 ? y[i - 1] : kBlank, y[i], i + 1 < y.size() ? y[i + 1] : kBlank});
  }
  auto name = [&](int b) { return b == kBlank ? std::string(kBlankName) : data.chars[b - 1]; };
  std::ostringstream allowed;
  for (const Triple& t : seen) allowed << name(t[0]) << "\t" << name(t[1]) << "\t" << name(t[2]) << "\n";
  emit(c, "allowed.txt", allowed.str());
  return kOk;
}

int cmd_train(const Common& c) {
  const ExperimentConfig config = load_config(c);
  const Dataset data = synth(config.synth);
  const ExperimentResult r =
      run_experiment(config, data, c.out.empty() ? std::nullopt : std::optional<fs::path>(c.out));
  std::ostringstream summary;
  summary << "dev_cer = " << format_fixed(r.dev_cer) << "\n"
          << "test_cer = " << format_fixed(r.test_cer) << "\n"
          << "test_cer_lm = " << format_fixed(r.test_cer_lm) << "\n";
  std::cout << summary.str();
  if (!c.out.empty()) emit(c, "summary.txt", summary.str());
  return kOk;
}

int cmd_decode(const Common& c, const std::string& checkpoint, const std::string& lm_path,
               std::optional<double> kappa, bool no_lm) {
  const ExperimentConfig config = load_config(c);
  const Dataset data = synth(config.synth);
  const Task task = make_task(config, data.chars);
  const AcousticModel model = load_model(config, task, checkpoint);
  const Split split = split_dataset(data);
  std::optional<NGramLM> lm;
  if (!no_lm) lm = lm_path.empty() ? train_lm(config, split, data) : load_lm(lm_path, task);
  DecodeConfig dc;
  dc.acoustic_weight = kappa.value_or(config.kappa);
  if (!(dc.acoustic_weight > 0)) throw Error("--kappa must be positive");
  dc.lm = lm ? &*lm : nullptr;
  const Eigen::MatrixXd protos = prototype_matrix(model.prototypes(task.alphabet), task.alphabet);
  std::ostringstream hyps;
  std::size_t edits = 0, length = 0;
  for (const Utterance* u : split.test) {
    const ScoreMatrix<double> s = log_softmax_usable(
        score(encode(model.encoder, model.config, u->features), protos), task.alphabet);
    const DecodeResult r = viterbi(s, task.graph, dc);
    edits += edit_distance(r.transcript, u->transcript);
    length += u->transcript.size();
    hyps << (u - data.utterances.data()) << "\t" << format_transcript(task.alphabet, u->transcript)
         << "\t" << format_transcript(task.alphabet, r.transcript) << "\n";
  }
  emit(c, "hyp.txt", hyps.str());
  const std::string summary =
      "cer = " + format_fixed(double(edits) / double(std::max<std::size_t>(length, 1))) + "\n";
  std::cout << summary;
  if (!c.out.empty()) emit(c, "decode.txt", summary);
  return kOk;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& runs, const std::string& grid_text) {
  std::vector<SweepRow> rows;
  std::vector<std::string> kinds;
  for (const std::string& run : runs) {
    Common rc = c;
    rc.config = (fs::path(run) / "config.txt").string();
    ExperimentConfig config = load_config(rc);
    if (!grid_text.empty()) {
      std::istringstream is("kappa_grid = " + grid_text);
      config.kappa_grid = parse_config(is).kappa_grid;
    }
    const Dataset data = synth(config.synth);
    const Task task = make_task(config, data.chars);
    const AcousticModel model = load_model(config, task, (fs::path(run) / "model.ckpt").string());
    const NGramLM lm = load_lm((fs::path(run) / "lm.arpa").string(), task);
    for (const SweepRow& r : sweep(model, config, task, data, lm, config.kappa_grid))
      rows.push_back(r);
    const std::string kind(loss_kind_name(config.loss));
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  emit(c, "sweep.csv", csv.str());
  std::ostringstream best;
  for (const std::string& kind : kinds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", argmin_kappa(rows, kind));
    best << "argmin_kappa " << kind << " " << buf << "\n";
  }
  if (c.out.empty()) std::cerr << best.str();
  else {
    emit(c, "argmin.txt", best.str());
    std::cout << best.str();
  }
  return kOk;
}

int cmd_grad_check(const Common& c, const std::string& loss, const std::string& scoring) {
  const LossKind kind = parse_loss_kind(loss);
  const ScoringKind sk = parse_scoring_kind(scoring);
  const GradProblem p = make_grad_problem(kind, sk, c.seed.value_or(1));
  double loss_err = 0;
  for (std::size_t i = 0; i < p.utterances.size(); ++i) {
    const ScoreMatrix<double> s = p.model.scores(p.utterances[i].features, p.task.alphabet);
    loss_err = std::max(loss_err, check_score_gradient(kind, s, p.numerators[i], p.task.graph,
                                                       p.task.alphabet).max_rel_error);
  }
  std::vector<const Utterance*> batch;
  std::vector<const Trellis*> nums;
  for (std::size_t i = 0; i < p.utterances.size(); ++i) {
    batch.push_back(&p.utterances[i]);
    nums.push_back(&p.numerators[i]);
  }
  const double e2e =
      check_model_gradient(p.model, batch, nums, kind, p.task.alphabet, p.task.graph).max_rel_error;
  const double worst = std::max(loss_err, e2e);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "loss %s\nscoring %s\nscore_grad_max_rel_error %.3e\n"
                "end_to_end_max_rel_error %.3e\nmax_rel_error %.3e\n",
                loss.c_str(), scoring.c_str(), loss_err, e2e, worst);
  std::cout << buf;
  if (!c.out.empty()) emit(c, "grad_check.txt", buf);
  return worst > 1e-4 ? kCheckFailed : kOk;
}

int cmd_oracle_check(const Common& c, std::size_t cases) {
  const auto rows = oracle_check(c.seed.value_or(1), cases);
  std::ostringstream table;
  write_oracle_table(table, rows);
  std::cout << table.str();
  if (!c.out.empty()) emit(c, "oracle.tsv", table.str());
  const bool ok = std::all_of(rows.begin(), rows.end(), [](const OracleRow& r) { return r.pass; });
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-dependent CTC toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string topology, alphabet_file, allowed, blank_mode = "single";
  auto* build = app.add_subcommand("build-graph", "write a decoding graph");
  build->add_option("--topology", topology, "ci | bichar | trichar")->required();
  build->add_option("--alphabet", alphabet_file, "one symbol per line")->required();
  build->add_option("--allowed", allowed, "tri-char allowed set (tab-separated)");
  build->add_option("--blank-mode", blank_mode, "single | cd");
  add_common(build, common, false);

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  add_common(synth_cmd, common, false);

  auto* train = app.add_subcommand("train", "train and evaluate one configuration");
  add_common(train, common, true);

  std::string checkpoint, lm_path;
  std::optional<double> kappa;
  bool no_lm = false;
  auto* decode = app.add_subcommand("decode", "decode the test split");
  add_common(decode, common, true);
  decode->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  decode->add_option("--lm", lm_path, "ARPA LM (default: retrain on the training split)");
  decode->add_option("--kappa", kappa, "acoustic weight (default: config kappa)");
  decode->add_flag("--no-lm", no_lm, "decode without a language model");

  std::vector<std::string> runs;
  std::string grid;
  auto* sweep_cmd = app.add_subcommand("sweep", "acoustic-weight sweep over trained runs");
  sweep_cmd->add_option("--run", runs, "training output directory (repeatable)")->required();
  sweep_cmd->add_option("--grid", grid, "comma-separated kappa values");
  add_common(sweep_cmd, common, false);

  std::string loss = "ctc-g", scoring = "cde";
  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
  grad->add_option("--loss", loss, "ctc | ctc-g | ctc-gb");
  grad->add_option("--scoring", scoring, "lookup | cde");
  add_common(grad, common, false);

  std::size_t cases = 100;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "brute-force agreement checks");
  oracle_cmd->add_option("--cases", cases, "random score matrices per topology");
  add_common(oracle_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*build) return cmd_build_graph(topology, alphabet_file, allowed, blank_mode, common);
    if (*synth_cmd) return cmd_synth(common);
    if (*train) return cmd_train(common);
    if (*decode) return cmd_decode(common, checkpoint, lm_path, kappa, no_lm);
    if (*sweep_cmd) return cmd_sweep(common, runs, grid);
    if (*grad) return cmd_grad_check(common, loss, scoring);
    if (*oracle_cmd) return cmd_oracle_check(common, cases);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
