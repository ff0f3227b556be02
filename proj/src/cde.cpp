// cdctc/cde.cpp

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

#include "cdctc/cde.hpp"

#include <algorithm>
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

std::vector<int> cde_inputs(const CdeConfig& config, const CdSymbol& s) {
  std::vector<int> in;
  switch (config.order) {
    case 1: in = {s.center}; break;
    case 2: in = {s.left, s.center}; break;
    default: in = {s.left, s.center, s.right}; break;
  }
  for (int b : in) {
    if (b < 0 || b >= config.vocab)
      throw Error("cde: symbol component outside the base alphabet");
  }
  return in;
}

struct Activations {
  Eigen::MatrixXd x, a1, h1, a2, h2;
};

Activations run(const CdeParams& p, std::span<const CdSymbol> symbols) {
  const CdeConfig& c = p.config;
  const auto m = static_cast<Eigen::Index>(symbols.size());
  Activations act;
  act.x.resize(m, c.order * c.d_emb);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::vector<int> in = cde_inputs(c, symbols[i]);
    for (int k = 0; k < c.order; ++k)
      act.x.block(i, k * c.d_emb, 1, c.d_emb) = p.embeddings[k].row(in[k]);
  }
  act.a1 = (act.x * p.w1.transpose()).rowwise() + p.b1;
  act.h1 = act.a1.cwiseMax(0.0);
  act.a2 = (act.h1 * p.w2.transpose()).rowwise() + p.b2;
  act.h2 = act.a2.cwiseMax(0.0);
  return act;
}

}  // namespace

CdeParams CdeParams::zeros(const CdeConfig& config) {
  CdeParams p;
  p.config = config;
  for (int k = 0; k < config.order; ++k)
    p.embeddings.push_back(Eigen::MatrixXd::Zero(config.vocab, config.d_emb));
  p.w1 = Eigen::MatrixXd::Zero(config.hidden, config.order * config.d_emb);
  p.b1 = Eigen::RowVectorXd::Zero(config.hidden);
  p.w2 = Eigen::MatrixXd::Zero(config.hidden, config.hidden);
  p.b2 = Eigen::RowVectorXd::Zero(config.hidden);
  p.proj = Eigen::MatrixXd::Zero(config.d_proto, config.hidden);
  p.proj_bias = Eigen::RowVectorXd::Zero(config.d_proto);
  return p;
}

CdeParams init_cde(const CdeConfig& config, Rng& rng) {
  if (config.order < 1 || config.order > 3 || config.vocab < 1 || config.d_emb < 1 ||
      config.hidden < 1 || config.d_proto < 1)
    throw Error("cde: invalid configuration");
  CdeParams p = CdeParams::zeros(config);
  const double emb_bound = 1.0 / std::sqrt(double(config.vocab));
  for (auto& e : p.embeddings) e = uniform_matrix(config.vocab, config.d_emb, emb_bound, rng);
  const double b1 = 1.0 / std::sqrt(double(config.order * config.d_emb));
  p.w1 = uniform_matrix(config.hidden, config.order * config.d_emb, b1, rng);
  p.b1 = uniform_matrix(1, config.hidden, b1, rng);
  const double b2 = 1.0 / std::sqrt(double(config.hidden));
  p.w2 = uniform_matrix(config.hidden, config.hidden, b2, rng);
  p.b2 = uniform_matrix(1, config.hidden, b2, rng);
  p.proj = uniform_matrix(config.d_proto, config.hidden, b2, rng);
  p.proj_bias = uniform_matrix(1, config.d_proto, b2, rng);
  return p;
}

std::size_t param_count(const CdeConfig& c) {
  const std::size_t n = c.order, v = c.vocab, e = c.d_emb, h = c.hidden,
                    d = c.d_proto;
  return n * v * e + (n * e * h + h) + (h * h + h) + (h * d + d);
}

std::size_t param_count(const LookupConfig& c) {
  return c.num_symbols * static_cast<std::size_t>(c.d_proto);
}

Triple symbol_key(const CdSymbol& s) { return {s.left, s.center, s.right}; }

std::optional<int> PrototypeTable::row_of(const Triple& key) const {
  auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) return std::nullopt;
  return static_cast<int>(it - keys.begin());
}

PrototypeTable cde_forward(const CdeParams& params,
                           std::span<const CdSymbol> symbols) {
  const Activations act = run(params, symbols);
  PrototypeTable table;
  table.provenance = Provenance::kCde;
  table.rows = (act.h2 * params.proj.transpose()).rowwise() + params.proj_bias;
  for (const CdSymbol& s : symbols) table.keys.push_back(symbol_key(s));
  return table;
}

CdeParams cde_backward(const CdeParams& params, std::span<const CdSymbol> symbols,
                       const Eigen::MatrixXd& upstream) {
  const CdeConfig& c = params.config;
  if (upstream.rows() != static_cast<Eigen::Index>(symbols.size()) ||
      upstream.cols() != c.d_proto)
    throw Error("cde_backward: upstream gradient has shape " +
                std::to_string(upstream.rows()) + "x" + std::to_string(upstream.cols()));
  const Activations act = run(params, symbols);
  CdeParams g = CdeParams::zeros(c);
  g.proj = upstream.transpose() * act.h2;
  g.proj_bias = upstream.colwise().sum();
  const Eigen::MatrixXd d_a2 =
      (upstream * params.proj).cwiseProduct((act.a2.array() > 0.0).cast<double>().matrix());
  g.w2 = d_a2.transpose() * act.h1;
  g.b2 = d_a2.colwise().sum();
  const Eigen::MatrixXd d_a1 =
      (d_a2 * params.w2).cwiseProduct((act.a1.array() > 0.0).cast<double>().matrix());
  g.w1 = d_a1.transpose() * act.x;
  g.b1 = d_a1.colwise().sum();
  const Eigen::MatrixXd d_x = d_a1 * params.w1;
  for (Eigen::Index i = 0; i < d_x.rows(); ++i) {
    const std::vector<int> in = cde_inputs(c, symbols[i]);
    for (int k = 0; k < c.order; ++k)
      g.embeddings[k].row(in[k]) += d_x.block(i, k * c.d_emb, 1, c.d_emb);
  }
  return g;
}

PrototypeTable lookup_table(const CdAlphabet& alphabet, int d_proto,
                            std::uint64_t seed) {
  Rng rng(seed);
  const auto usable = alphabet.usable_ids();
  PrototypeTable table;
  table.provenance = Provenance::kLookup;
  const double bound = 1.0 / std::sqrt(double(d_proto));
  table.rows = uniform_matrix(static_cast<Eigen::Index>(usable.size()), d_proto,
                              bound, rng);
  for (int id : usable) table.keys.push_back(symbol_key(alphabet.symbol(id)));
  return table;
}

Eigen::MatrixXd prototype_matrix(const PrototypeTable& table,
                                 const CdAlphabet& alphabet) {
  std::map<Triple, int> index;
  for (std::size_t k = 0; k < table.keys.size(); ++k)
    index.emplace(table.keys[k], static_cast<int>(k));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(alphabet.size(), table.rows.cols());
  for (int id : alphabet.usable_ids()) {
    const auto it = index.find(symbol_key(alphabet.symbol(id)));
    if (it == index.end())
      throw Error("prototype table has no entry for CD symbol '" +
                  alphabet.name(id) + "'");
    out.row(id) = table.rows.row(it->second);
  }
  return out;
}

}  // namespace cdctc
