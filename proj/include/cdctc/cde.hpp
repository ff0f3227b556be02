// cdctc/cde.hpp

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

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/common.hpp"

namespace cdctc {

struct CdeConfig {
  int order = 2;      // number of per-position embedding tables
  int vocab = 3;      // |L^|
  int d_emb = 160;
  int hidden = 320;
  int d_proto = 320;
};

// Context-Dependent Embedding network. A CD symbol (l, c, r) is embedded by
// looking up each position in its own table, concatenating, and passing the
// result through two ReLU layers and an affine projection:
//
//   proto = P relu(W2 relu(W1 [E0[l]; E1[c]; E2[r]] + b1) + b2) + p
struct CdeParams {
  CdeConfig config;
  std::vector<Eigen::MatrixXd> embeddings;  // order tables of vocab x d_emb
  Eigen::MatrixXd w1;                       // hidden x (order * d_emb)
  Eigen::RowVectorXd b1;
  Eigen::MatrixXd w2;  // hidden x hidden
  Eigen::RowVectorXd b2;
  Eigen::MatrixXd proj;  // d_proto x hidden
  Eigen::RowVectorXd proj_bias;

  static CdeParams zeros(const CdeConfig& config);

  template <typename F>
  void for_each_block(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_block(F&& f) const { visit(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    for (std::size_t k = 0; k < self.embeddings.size(); ++k)
      f("cde.emb" + std::to_string(k), self.embeddings[k]);
    f(std::string("cde.w1"), self.w1);
    f(std::string("cde.b1"), self.b1);
    f(std::string("cde.w2"), self.w2);
    f(std::string("cde.b2"), self.b2);
    f(std::string("cde.proj"), self.proj);
    f(std::string("cde.proj_bias"), self.proj_bias);
  }
};

// Centered uniform init with bound 1/sqrt(fan_in); an embedding table's fan-in
// is its one-hot input width.
CdeParams init_cde(const CdeConfig& config, Rng& rng);

struct LookupConfig {
  std::size_t num_symbols = 0;
  int d_proto = 320;
};

std::size_t param_count(const CdeConfig& config);
std::size_t param_count(const LookupConfig& config);

enum class Provenance { kCde, kLookup };

// (left, center, right) with kNoContext in unused slots.
Triple symbol_key(const CdSymbol& symbol);

// One prototype per CD symbol, addressed by symbol key.
struct PrototypeTable {
  Eigen::MatrixXd rows;  // num_symbols x d_proto
  std::vector<Triple> keys;
  Provenance provenance = Provenance::kLookup;

  std::optional<int> row_of(const Triple& key) const;
};

PrototypeTable cde_forward(const CdeParams& params,
                           std::span<const CdSymbol> symbols);

// Gradient of the loss w.r.t. every parameter block, given the gradient
// w.r.t. the generated prototypes (one row per symbol).
CdeParams cde_backward(const CdeParams& params, std::span<const CdSymbol> symbols,
                       const Eigen::MatrixXd& upstream);

// Free prototypes for every usable symbol of the alphabet.
PrototypeTable lookup_table(const CdAlphabet& alphabet, int d_proto,
                            std::uint64_t seed);

// alphabet.size() x d_proto matrix aligned with score-matrix columns; rows of
// unusable ids are zero. Throws if a usable symbol has no prototype.
Eigen::MatrixXd prototype_matrix(const PrototypeTable& table,
                                 const CdAlphabet& alphabet);

}  // namespace cdctc
