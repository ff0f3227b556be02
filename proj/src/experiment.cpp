// cdctc/experiment.cpp

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

#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "cdctc/checkpoint.hpp"
#include "cdctc/harness.hpp"

namespace cdctc {

namespace {

constexpr std::size_t kTrainCerSubset = 20;

struct Labelled {
  std::vector<const Utterance*> utterances;
  std::vector<Trellis> numerators;
};

Labelled label(const std::vector<const Utterance*>& utterances, const Task& task,
               LossKind kind) {
  Labelled out;
  out.utterances = utterances;
  for (const Utterance* u : utterances)
    out.numerators.push_back(
        unroll(numerator_graph(u->transcript, task.alphabet, numerator_kind(kind)),
               static_cast<int>(u->features.rows())));
  return out;
}

double mean_loss(const AcousticModel& model, const Labelled& set, LossKind kind,
                 const Task& task) {
  if (set.utterances.empty()) return 0;
  const Eigen::MatrixXd protos = prototype_matrix(model.prototypes(task.alphabet), task.alphabet);
  double total = 0;
  for (std::size_t i = 0; i < set.utterances.size(); ++i) {
    const ScoreMatrix<double> s =
        score(encode(model.encoder, model.config, set.utterances[i]->features), protos);
    total += sequence_loss(kind, s, set.numerators[i], task.graph, task.alphabet).nll;
  }
  return total / static_cast<double>(set.utterances.size());
}

std::vector<ScoreMatrix<double>> log_probs(const AcousticModel& model, const Task& task,
                                           const std::vector<const Utterance*>& utterances) {
  const Eigen::MatrixXd protos = prototype_matrix(model.prototypes(task.alphabet), task.alphabet);
  std::vector<ScoreMatrix<double>> out;
  for (const Utterance* u : utterances)
    out.push_back(log_softmax_usable(
        score(encode(model.encoder, model.config, u->features), protos), task.alphabet));
  return out;
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Task make_task(const ExperimentConfig& config, const std::vector<std::string>& chars) {
  const CdAlphabet base = CdAlphabet::ci(chars);
  switch (config.topology) {
    case Topology::kCi: {
      Task t{base, decoding_graph(base)};
      return t;
    }
    case Topology::kBichar: {
      CdAlphabet a = CdAlphabet::bichar(base, config.blank_mode);
      Fst g = decoding_graph(a);
      return Task{std::move(a), std::move(g)};
    }
    case Topology::kTrichar: {
      CdAlphabet a = CdAlphabet::trichar(base, read_allowed_file(config.allowed, base));
      Fst g = decoding_graph(a);
      return Task{std::move(a), std::move(g)};
    }
  }
  throw Error("make_task: unknown topology");
}

Split split_dataset(const Dataset& data) {
  Split s;
  const std::size_t n = data.utterances.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_dev = n / 10;
  for (std::size_t i = 0; i < n; ++i) {
    const Utterance* u = &data.utterances[i];
    if (i < n_train) s.train.push_back(u);
    else if (i < n_train + n_dev) s.dev.push_back(u);
    else s.test.push_back(u);
  }
  return s;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "step,split,loss,cer\n";
  for (const MetricsRow& r : rows)
    os << r.step << "," << r.split << "," << fixed6(r.loss) << "," << fixed6(r.cer) << "\n";
}

double corpus_cer(const AcousticModel& model, const Task& task,
                  const std::vector<const Utterance*>& utterances,
                  const NGramLM* lm, double kappa) {
  std::vector<std::vector<int>> refs;
  for (const Utterance* u : utterances) refs.push_back(u->transcript);
  const double grid[] = {kappa};
  return sweep_scores("", log_probs(model, task, utterances), refs, task.graph, lm, grid)
      .front()
      .cer;
}

NGramLM train_lm(const ExperimentConfig& config, const Split& split, const Dataset& data) {
  std::vector<std::vector<int>> corpus;
  for (const Utterance* u : split.train) corpus.push_back(u->transcript);
  if (corpus.empty()) throw Error("train_lm: empty training split");
  return train_char_lm(corpus, static_cast<int>(data.chars.size()) + 1, config.lm_order);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data,
                                const std::optional<std::filesystem::path>& out_dir) {
  validate(config);
  if (data.utterances.empty()) throw Error("run_experiment: empty dataset");
  if (data.utterances.front().features.cols() != config.model.d_feat)
    throw Error("run_experiment: dataset feature dimension differs from d_feat");
  const Task task = make_task(config, data.chars);
  const Split split = split_dataset(data);
  if (split.train.empty() || split.dev.empty() || split.test.empty())
    throw Error("run_experiment: need at least 10 utterances for the 80/10/10 split");
  const Labelled train = label(split.train, task, config.loss);
  const Labelled dev = label(split.dev, task, config.loss);
  const Labelled test = label(split.test, task, config.loss);
  const std::vector<const Utterance*> train_subset(
      split.train.begin(),
      split.train.begin() + std::min(kTrainCerSubset, split.train.size()));

  ExperimentResult result;
  result.model = init_model(config.model, config.scoring, task.alphabet, config.seed);
  AcousticModel& model = result.model;
  Adam adam(model, config.adam);
  Rng rng(config.seed * 0x9E3779B97F4A7C15ull + 1);

  std::vector<std::size_t> order(train.utterances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  double running = 0;
  long running_count = 0;

  auto evaluate = [&](long step) {
    const double train_loss = running_count > 0 ? running / double(running_count)
                                                : mean_loss(model, train, config.loss, task);
    result.metrics.push_back(
        {step, "train", train_loss, corpus_cer(model, task, train_subset, nullptr, 1.0)});
    result.metrics.push_back({step, "dev", mean_loss(model, dev, config.loss, task),
                              corpus_cer(model, task, split.dev, nullptr, 1.0)});
    running = 0;
    running_count = 0;
  };

  evaluate(0);
  std::vector<const Utterance*> batch;
  std::vector<const Trellis*> numerators;
  for (long step = 1; step <= config.steps; ++step) {
    batch.clear();
    numerators.clear();
    for (int b = 0; b < config.batch; ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
          std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)))]);
        cursor = 0;
      }
      const std::size_t k = order[cursor++];
      batch.push_back(train.utterances[k]);
      numerators.push_back(&train.numerators[k]);
    }
    running += train_step(model, adam, batch, numerators, config.loss, task.alphabet,
                          task.graph).loss;
    ++running_count;
    if (step % config.eval_every == 0 || step == config.steps) evaluate(step);
  }

  result.lm = train_lm(config, split, data);
  result.dev_cer = result.metrics.back().cer;
  result.test_cer = corpus_cer(model, task, split.test, nullptr, 1.0);
  result.test_cer_lm = corpus_cer(model, task, split.test, &result.lm, config.kappa);
  const double test_loss = mean_loss(model, test, config.loss, task);
  result.metrics.push_back({config.steps, "test", test_loss, result.test_cer});
  result.metrics.push_back({config.steps, "test+lm", test_loss, result.test_cer_lm});

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream cfg(*out_dir / "config.txt");
    write_config(cfg, config);
    std::ofstream metrics(*out_dir / "metrics.csv");
    write_metrics_csv(metrics, result.metrics);
    write_checkpoint((*out_dir / "model.ckpt").string(), model.to_tensors());
    std::ofstream arpa(*out_dir / "lm.arpa");
    result.lm.write_arpa(arpa, task.alphabet);
  }
  return result;
}

std::vector<SweepRow> sweep(const AcousticModel& model, const ExperimentConfig& config,
                            const Task& task, const Dataset& data, const NGramLM& lm,
                            std::span<const double> grid) {
  const Split split = split_dataset(data);
  std::vector<std::vector<int>> refs;
  for (const Utterance* u : split.dev) refs.push_back(u->transcript);
  return sweep_scores(std::string(loss_kind_name(config.loss)),
                      log_probs(model, task, split.dev), refs, task.graph, &lm, grid);
}

}  // namespace cdctc
