// cdctc/model.cpp

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

#include "cdctc/model.hpp"

#include <cmath>
#include <map>

namespace cdctc {

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                               Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& a) {
  return (a.array() > 0.0).cast<double>().matrix();
}

std::vector<std::span<double>> flat_views(AcousticModel& model) {
  std::vector<std::span<double>> views;
  model.for_each_block([&](const std::string&, auto& block) {
    views.emplace_back(block.data(), static_cast<std::size_t>(block.size()));
  });
  return views;
}

bool has_plain_blank(const CdAlphabet& alphabet) {
  return alphabet.blank_mode() == BlankMode::kSingle;
}

}  // namespace

EncoderParams EncoderParams::zeros(const ModelConfig& c) {
  EncoderParams p;
  p.w1 = Eigen::MatrixXd::Zero(c.d_hidden, (2 * c.window + 1) * c.d_feat);
  p.b1 = Eigen::RowVectorXd::Zero(c.d_hidden);
  p.w2 = Eigen::MatrixXd::Zero(c.d_proto, c.d_hidden);
  p.b2 = Eigen::RowVectorXd::Zero(c.d_proto);
  return p;
}

EncoderParams init_encoder(const ModelConfig& c, Rng& rng) {
  EncoderParams p;
  const int fan_in = (2 * c.window + 1) * c.d_feat;
  const double b1 = 1.0 / std::sqrt(double(fan_in));
  p.w1 = uniform_matrix(c.d_hidden, fan_in, b1, rng);
  p.b1 = uniform_matrix(1, c.d_hidden, b1, rng);
  const double b2 = 1.0 / std::sqrt(double(c.d_hidden));
  p.w2 = uniform_matrix(c.d_proto, c.d_hidden, b2, rng);
  p.b2 = uniform_matrix(1, c.d_proto, b2, rng);
  return p;
}

Eigen::MatrixXd window_features(const Eigen::MatrixXd& features, int radius) {
  const Eigen::Index T = features.rows(), d = features.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T, (2 * radius + 1) * d);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = -radius; k <= radius; ++k) {
      const Eigen::Index src = t + k;
      if (src < 0 || src >= T) continue;
      out.block(t, (k + radius) * d, 1, d) = features.row(src);
    }
  }
  return out;
}

Eigen::MatrixXd encode(const EncoderParams& p, const ModelConfig& c,
                       const Eigen::MatrixXd& features) {
  if (features.cols() != c.d_feat)
    throw Error("encode: feature width " + std::to_string(features.cols()) +
                " != " + std::to_string(c.d_feat));
  const Eigen::MatrixXd x = window_features(features, c.window);
  const Eigen::MatrixXd h1 = ((x * p.w1.transpose()).rowwise() + p.b1).cwiseMax(0.0);
  return ((h1 * p.w2.transpose()).rowwise() + p.b2).cwiseMax(0.0);
}

ScoreMatrix<double> score(const Eigen::MatrixXd& hidden,
                          const Eigen::MatrixXd& prototypes) {
  if (hidden.cols() != prototypes.cols())
    throw Error("score: hidden width " + std::to_string(hidden.cols()) +
                " != prototype width " + std::to_string(prototypes.cols()));
  return hidden * prototypes.transpose();
}

ScoringKind parse_scoring_kind(std::string_view name) {
  if (name == "lookup") return ScoringKind::kLookup;
  if (name == "cde") return ScoringKind::kCde;
  throw Error("unknown scoring kind '" + std::string(name) + "'");
}

std::string_view scoring_kind_name(ScoringKind kind) {
  return kind == ScoringKind::kLookup ? "lookup" : "cde";
}

std::vector<CdSymbol> cde_symbols(const CdAlphabet& alphabet) {
  std::vector<CdSymbol> out;
  for (int id : alphabet.usable_ids()) {
    const CdSymbol& s = alphabet.symbol(id);
    if (s.is_blank && has_plain_blank(alphabet)) continue;
    out.push_back(s);
  }
  return out;
}

AcousticModel init_model(const ModelConfig& config, ScoringKind scoring,
                         const CdAlphabet& alphabet, std::uint64_t seed) {
  Rng rng(seed);
  AcousticModel m;
  m.config = config;
  m.scoring = scoring;
  m.encoder = init_encoder(config, rng);
  if (scoring == ScoringKind::kLookup) {
    m.lookup = lookup_table(alphabet, config.d_proto, rng.next());
  } else {
    CdeConfig cc;
    cc.order = alphabet.order();
    cc.vocab = alphabet.base_size();
    cc.d_emb = config.d_emb;
    cc.hidden = config.cde_hidden;
    cc.d_proto = config.d_proto;
    m.cde = init_cde(cc, rng);
    if (has_plain_blank(alphabet))
      m.blank = uniform_matrix(1, config.d_proto, 1.0 / std::sqrt(double(config.d_proto)), rng);
  }
  return m;
}

AcousticModel AcousticModel::zeros_like() const {
  AcousticModel z = *this;
  z.for_each_block([](const std::string&, auto& block) { block.setZero(); });
  return z;
}

std::size_t AcousticModel::num_parameters() const {
  std::size_t n = 0;
  for_each_block([&](const std::string&, const auto& block) {
    n += static_cast<std::size_t>(block.size());
  });
  return n;
}

PrototypeTable AcousticModel::prototypes(const CdAlphabet& alphabet) const {
  if (scoring == ScoringKind::kLookup) return lookup;
  const std::vector<CdSymbol> symbols = cde_symbols(alphabet);
  PrototypeTable table = cde_forward(cde, symbols);
  if (has_plain_blank(alphabet)) {
    if (blank.size() != config.d_proto)
      throw Error("model: no free blank prototype for a single-blank alphabet");
    table.rows.conservativeResize(table.rows.rows() + 1, Eigen::NoChange);
    table.rows.bottomRows(1) = blank;
    table.keys.push_back(symbol_key(alphabet.symbol(kBlank)));
  }
  return table;
}

ScoreMatrix<double> AcousticModel::scores(const Eigen::MatrixXd& features,
                                          const CdAlphabet& alphabet) const {
  return score(encode(encoder, config, features),
               prototype_matrix(prototypes(alphabet), alphabet));
}

std::vector<Tensor> AcousticModel::to_tensors() const {
  std::vector<Tensor> out;
  for_each_block([&](const std::string& name, const auto& block) {
    out.push_back(to_tensor(name, block));
  });
  return out;
}

void AcousticModel::load_tensors(const std::vector<Tensor>& tensors) {
  std::map<std::string, const Tensor*> by_name;
  for (const Tensor& t : tensors) by_name[t.name] = &t;
  for_each_block([&](const std::string& name, auto& block) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("checkpoint: missing tensor " + name);
    const Tensor& t = *it->second;
    if (t.rows != block.rows() || t.cols != block.cols())
      throw Error("checkpoint: tensor " + name + " has shape " +
                  std::to_string(t.rows) + "x" + std::to_string(t.cols));
    for (Eigen::Index i = 0; i < t.rows; ++i)
      for (Eigen::Index j = 0; j < t.cols; ++j)
        block(i, j) = t.data[static_cast<std::size_t>(i * t.cols + j)];
  });
}

BatchGradient compute_gradient(const AcousticModel& model,
                               std::span<const Utterance* const> batch,
                               std::span<const Trellis* const> numerators,
                               LossKind kind, const CdAlphabet& alphabet,
                               const Fst& den_graph) {
  if (batch.empty()) throw Error("compute_gradient: empty batch");
  if (batch.size() != numerators.size())
    throw Error("compute_gradient: one numerator trellis per utterance required");
  const PrototypeTable table = model.prototypes(alphabet);
  const Eigen::MatrixXd protos = prototype_matrix(table, alphabet);
  const EncoderParams& enc = model.encoder;
  const double scale = 1.0 / static_cast<double>(batch.size());

  BatchGradient out;
  out.grad = model.zeros_like();
  EncoderParams& g = out.grad.encoder;
  Eigen::MatrixXd d_protos = Eigen::MatrixXd::Zero(protos.rows(), protos.cols());

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Utterance& utt = *batch[b];
    const Eigen::MatrixXd x = window_features(utt.features, model.config.window);
    const Eigen::MatrixXd a1 = (x * enc.w1.transpose()).rowwise() + enc.b1;
    const Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
    const Eigen::MatrixXd a2 = (h1 * enc.w2.transpose()).rowwise() + enc.b2;
    const Eigen::MatrixXd h = a2.cwiseMax(0.0);
    const ScoreMatrix<double> s = score(h, protos);
    LossResult<double> r;
    try {
      r = sequence_loss(kind, s, *numerators[b], den_graph, alphabet);
    } catch (const Error& e) {
      throw Error("utterance " + std::to_string(b) + " in batch: " + e.what());
    }
    out.loss += r.nll * scale;
    const Eigen::MatrixXd grad_scores = r.grad * scale;
    d_protos.noalias() += grad_scores.transpose() * h;
    const Eigen::MatrixXd d_a2 = (grad_scores * protos).cwiseProduct(relu_mask(a2));
    g.w2.noalias() += d_a2.transpose() * h1;
    g.b2 += d_a2.colwise().sum();
    const Eigen::MatrixXd d_a1 = (d_a2 * enc.w2).cwiseProduct(relu_mask(a1));
    g.w1.noalias() += d_a1.transpose() * x;
    g.b1 += d_a1.colwise().sum();
  }

  if (model.scoring == ScoringKind::kLookup) {
    std::map<Triple, int> row;
    for (std::size_t k = 0; k < table.keys.size(); ++k)
      row.emplace(table.keys[k], static_cast<int>(k));
    for (int id : alphabet.usable_ids())
      out.grad.lookup.rows.row(row.at(symbol_key(alphabet.symbol(id)))) += d_protos.row(id);
  } else {
    const std::vector<CdSymbol> symbols = cde_symbols(alphabet);
    Eigen::MatrixXd upstream(static_cast<Eigen::Index>(symbols.size()), protos.cols());
    for (std::size_t i = 0; i < symbols.size(); ++i)
      upstream.row(static_cast<Eigen::Index>(i)) = d_protos.row(symbols[i].id);
    out.grad.cde = cde_backward(model.cde, symbols, upstream);
    if (out.grad.blank.size() > 0) out.grad.blank = d_protos.row(kBlank);
  }
  return out;
}

Adam::Adam(const AcousticModel& model, AdamConfig config)
    : config_(config), m_(model.zeros_like()), v_(model.zeros_like()) {}

double Adam::current_lr() const {
  if (config_.halve_every <= 0 || step_ < config_.halve_start) return config_.lr;
  const long halvings = (step_ - config_.halve_start) / config_.halve_every + 1;
  return config_.lr * std::pow(0.5, static_cast<double>(halvings));
}

void Adam::update(AcousticModel& params, AcousticModel& grad) {
  const double lr = current_lr();
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  auto p = flat_views(params);
  auto g = flat_views(grad);
  auto m = flat_views(m_);
  auto v = flat_views(v_);
  if (p.size() != g.size() || p.size() != m.size())
    throw Error("adam: parameter and gradient layouts differ");
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (p[b].size() != g[b].size()) throw Error("adam: block size mismatch");
    for (std::size_t i = 0; i < p[b].size(); ++i) {
      m[b][i] = config_.beta1 * m[b][i] + (1.0 - config_.beta1) * g[b][i];
      v[b][i] = config_.beta2 * v[b][i] + (1.0 - config_.beta2) * g[b][i] * g[b][i];
      const double m_hat = m[b][i] / c1;
      const double v_hat = v[b][i] / c2;
      p[b][i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

StepMetrics train_step(AcousticModel& model, Adam& optimizer,
                       std::span<const Utterance* const> batch,
                       std::span<const Trellis* const> numerators, LossKind kind,
                       const CdAlphabet& alphabet, const Fst& den_graph) {
  BatchGradient bg = compute_gradient(model, batch, numerators, kind, alphabet, den_graph);
  StepMetrics out;
  out.loss = bg.loss;
  double sq = 0;
  bg.grad.for_each_block([&](const std::string&, const auto& block) {
    sq += block.squaredNorm();
  });
  out.grad_norm = std::sqrt(sq);
  optimizer.update(model, bg.grad);
  return out;
}

}  // namespace cdctc
