// cdctc/model.hpp

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
#include <span>
#include <string>
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/cde.hpp"
#include "cdctc/checkpoint.hpp"
#include "cdctc/forward_backward.hpp"
#include "cdctc/fst.hpp"
#include "cdctc/graph.hpp"
#include "cdctc/loss.hpp"

namespace cdctc {

struct ModelConfig {
  int d_feat = 8;
  int window = 2;  // frames of context on each side
  int d_hidden = 64;
  int d_proto = 64;
  // CDE dimensions, used when scoring through the embedding network.
  int d_emb = 16;
  int cde_hidden = 64;
};

struct Utterance {
  Eigen::MatrixXd features;  // T x d_feat
  std::vector<int> transcript;  // base ids
};

// Two affine+ReLU layers over a (2k+1)-frame window of zero-padded features.
struct EncoderParams {
  Eigen::MatrixXd w1;  // d_hidden x (2k+1) d_feat
  Eigen::RowVectorXd b1;
  Eigen::MatrixXd w2;  // d_proto x d_hidden
  Eigen::RowVectorXd b2;

  static EncoderParams zeros(const ModelConfig& config);

  template <typename F>
  void for_each_block(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_block(F&& f) const { visit(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f(std::string("encoder.w1"), self.w1);
    f(std::string("encoder.b1"), self.b1);
    f(std::string("encoder.w2"), self.w2);
    f(std::string("encoder.b2"), self.b2);
  }
};

EncoderParams init_encoder(const ModelConfig& config, Rng& rng);

// T x (2k+1) d_feat stacked windows.
Eigen::MatrixXd window_features(const Eigen::MatrixXd& features, int radius);

Eigen::MatrixXd encode(const EncoderParams& params, const ModelConfig& config,
                       const Eigen::MatrixXd& features);

// log O = hidden * prototypes^T. `prototypes` has one row per score column.
ScoreMatrix<double> score(const Eigen::MatrixXd& hidden,
                          const Eigen::MatrixXd& prototypes);

enum class ScoringKind { kLookup, kCde };

ScoringKind parse_scoring_kind(std::string_view name);
std::string_view scoring_kind_name(ScoringKind kind);

// Encoder plus scoring layer. The scoring layer is either a free look-up
// table or the CDE network; with CDE a context-free blank keeps its own free
// prototype while context-dependent blanks are generated like other symbols.
struct AcousticModel {
  ModelConfig config;
  ScoringKind scoring = ScoringKind::kLookup;
  EncoderParams encoder;
  PrototypeTable lookup;
  CdeParams cde;
  Eigen::RowVectorXd blank;

  template <typename F>
  void for_each_block(F&& f) { visit(*this, f); }
  template <typename F>
  void for_each_block(F&& f) const { visit(*this, f); }

  // Same shapes, all zeros.
  AcousticModel zeros_like() const;
  std::size_t num_parameters() const;

  // Prototype table for the alphabet (CDE output, or the look-up table
  // itself). Look-up scoring throws for symbols outside the trained table.
  PrototypeTable prototypes(const CdAlphabet& alphabet) const;
  ScoreMatrix<double> scores(const Eigen::MatrixXd& features,
                             const CdAlphabet& alphabet) const;

  std::vector<Tensor> to_tensors() const;
  void load_tensors(const std::vector<Tensor>& tensors);

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    self.encoder.for_each_block(f);
    if (self.scoring == ScoringKind::kLookup) {
      f(std::string("lookup.prototypes"), self.lookup.rows);
    } else {
      self.cde.for_each_block(f);
      if (self.blank.size() > 0) f(std::string("scoring.blank"), self.blank);
    }
  }
};

AcousticModel init_model(const ModelConfig& config, ScoringKind scoring,
                         const CdAlphabet& alphabet, std::uint64_t seed);

// Symbols whose prototypes come from the CDE network, in id order.
std::vector<CdSymbol> cde_symbols(const CdAlphabet& alphabet);

// Mean batch loss and its gradient with respect to every parameter.
struct BatchGradient {
  double loss = 0;
  AcousticModel grad;
};

BatchGradient compute_gradient(const AcousticModel& model,
                               std::span<const Utterance* const> batch,
                               std::span<const Trellis* const> numerators,
                               LossKind kind, const CdAlphabet& alphabet,
                               const Fst& den_graph);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Halve the rate every `halve_every` steps from `halve_start` on; 0 = off.
  long halve_every = 0;
  long halve_start = 0;
};

class Adam {
 public:
  Adam(const AcousticModel& model, AdamConfig config);
  void update(AcousticModel& params, AcousticModel& grad);
  long steps() const { return step_; }
  double current_lr() const;

 private:
  AdamConfig config_;
  AcousticModel m_;
  AcousticModel v_;
  long step_ = 0;
};

struct StepMetrics {
  double loss = 0;
  double grad_norm = 0;
};

StepMetrics train_step(AcousticModel& model, Adam& optimizer,
                       std::span<const Utterance* const> batch,
                       std::span<const Trellis* const> numerators, LossKind kind,
                       const CdAlphabet& alphabet, const Fst& den_graph);

}  // namespace cdctc
