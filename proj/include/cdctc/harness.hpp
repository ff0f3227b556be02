// cdctc/harness.hpp

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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdctc/alphabet.hpp"
#include "cdctc/decoder.hpp"
#include "cdctc/fst.hpp"
#include "cdctc/model.hpp"

namespace cdctc {

// Synthetic coarticulated speech. Every character c has a feature template;
// its frames are template[c] + alpha * shift[left] + sigma * noise, with
// `left` the preceding character (0 at the utterance start). Transcripts are
// drawn from a peaked first-order Markov chain so that a character LM helps.
struct SynthSpec {
  int alphabet_size = 4;
  int samples = 200;
  int min_length = 3;
  int max_length = 6;
  int min_duration = 2;
  int max_duration = 4;
  int d_feat = 8;
  double alpha = 0.8;
  double sigma = 0.5;
  double silence_prob = 0.3;  // chance of a 1-2 frame pause between characters
  double markov_peak = 4.0;   // higher = more predictable transcripts
  // Pulls the template of every even-numbered character (b, d, ...) toward
  // its predecessor's; 1 makes the pair acoustically identical.
  double confusion = 0.0;
  std::uint64_t seed = 1;
};

struct Dataset {
  std::vector<std::string> chars;  // base names without the blank
  Eigen::MatrixXd templates;       // (|L| + 1) x d_feat, row 0 = silence
  // (|L| + 1)^2 x d_feat, row prev * (|L| + 1) + c; prev 0 = boundary.
  Eigen::MatrixXd shifts;
  std::vector<Utterance> utterances;
};

void validate(const SynthSpec& spec);
Dataset synth(const SynthSpec& spec);

// One line per utterance: index, transcript, frames, then the row-major
// features; plus the templates. Doubles are printed with %.17g.
void write_dataset(std::ostream& os, const Dataset& data);

enum class Topology { kCi, kBichar, kTrichar };

Topology parse_topology(std::string_view name);
std::string_view topology_name(Topology topology);

struct ExperimentConfig {
  Topology topology = Topology::kBichar;
  BlankMode blank_mode = BlankMode::kSingle;
  LossKind loss = LossKind::kCtcG;
  ScoringKind scoring = ScoringKind::kLookup;
  std::string allowed;  // tri-char allowed-set file

  SynthSpec synth;
  ModelConfig model;
  AdamConfig adam;
  long steps = 2000;
  int batch = 16;
  long eval_every = 250;

  int lm_order = 2;
  double kappa = 1.0;
  std::vector<double> kappa_grid{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  std::uint64_t seed = 1;  // model init and batch order
};

// Flat "key = value" text; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig read_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& config);

// Throws Error naming the offending setting for every unsupported
// (topology, blank mode, loss, scoring) combination.
void validate(const ExperimentConfig& config);

// Sets the data and model seeds together.
void set_seed(ExperimentConfig& config, std::uint64_t seed);

// Alphabet and decoding/denominator graph for a configuration.
struct Task {
  CdAlphabet alphabet;
  Fst graph;
};

Task make_task(const ExperimentConfig& config, const std::vector<std::string>& chars);

// Deterministic 80/10/10 split by utterance index.
struct Split {
  std::vector<const Utterance*> train, dev, test;
};

Split split_dataset(const Dataset& data);

struct MetricsRow {
  long step = 0;
  std::string split;
  double loss = 0;
  double cer = 0;
};

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);

struct ExperimentResult {
  AcousticModel model;
  NGramLM lm;
  std::vector<MetricsRow> metrics;
  double dev_cer = 0;
  double test_cer = 0;     // without LM
  double test_cer_lm = 0;  // with LM at config.kappa
};

// Corpus CER of Viterbi decodes (no LM when lm is null).
double corpus_cer(const AcousticModel& model, const Task& task,
                  const std::vector<const Utterance*>& utterances,
                  const NGramLM* lm, double kappa);

// Character LM over the training transcripts.
NGramLM train_lm(const ExperimentConfig& config, const Split& split,
                 const Dataset& data);

// Trains, evaluates, and (if out_dir is given) writes config.txt,
// metrics.csv, model.ckpt and lm.arpa there.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data,
                                const std::optional<std::filesystem::path>& out_dir = {});

// CER over the grid for one trained model on the dev split.
std::vector<SweepRow> sweep(const AcousticModel& model, const ExperimentConfig& config,
                            const Task& task, const Dataset& data, const NGramLM& lm,
                            std::span<const double> grid);

// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3); the floor keeps
// entries near zero from turning round-off into large ratios.
double relative_error(double analytic, double numeric);

struct GradCheckReport {
  double max_rel_error = 0;
  std::size_t checked = 0;
};

// Central differences on every usable score entry.
GradCheckReport check_score_gradient(LossKind kind, const ScoreMatrix<double>& scores,
                                     const Trellis& numerator, const Fst& den_graph,
                                     const CdAlphabet& alphabet, double eps = 1e-5);

// Central differences on every model parameter against compute_gradient.
GradCheckReport check_model_gradient(const AcousticModel& model,
                                     std::span<const Utterance* const> batch,
                                     std::span<const Trellis* const> numerators,
                                     LossKind kind, const CdAlphabet& alphabet,
                                     const Fst& den_graph, double eps = 1e-5);

// A small seeded problem over {a, b, c}: bi-char topology (CD blanks for
// ctc-gb), a tiny model and two utterances.
struct GradProblem {
  Task task;
  AcousticModel model;
  std::vector<Utterance> utterances;
  std::vector<Trellis> numerators;
};

GradProblem make_grad_problem(LossKind kind, ScoringKind scoring, std::uint64_t seed);

struct OracleRow {
  std::string check;     // "loss" or "language"
  std::string topology;  // ci, bichar, bichar-cdblank, trichar
  std::size_t cases = 0;
  double max_error = 0;  // loss rows only
  bool pass = true;
};

// Random score matrices (T <= 5, two letters) against brute force, and the
// three-way language agreement for transcripts of length <= 4 and T <= 6.
std::vector<OracleRow> oracle_check(std::uint64_t seed, std::size_t cases);
void write_oracle_table(std::ostream& os, const std::vector<OracleRow>& rows);

}  // namespace cdctc
