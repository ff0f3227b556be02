// cdctc/synth.cpp

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
#include <cstdio>
#include <ostream>

#include "cdctc/harness.hpp"

namespace cdctc {

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

int draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  for (std::size_t i = 0; i < cumulative.size(); ++i)
    if (u < cumulative[i]) return static_cast<int>(i);
  return static_cast<int>(cumulative.size()) - 1;
}

}  // namespace

void validate(const SynthSpec& s) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error("synth: " + what);
  };
  require(s.alphabet_size >= 1 && s.alphabet_size <= 26, "alphabet_size must be in [1, 26]");
  require(s.samples >= 1, "samples must be positive");
  require(s.min_length >= 1 && s.min_length <= s.max_length, "need 1 <= min_length <= max_length");
  require(s.min_duration >= 1 && s.min_duration <= s.max_duration,
          "need 1 <= min_duration <= max_duration");
  require(s.d_feat >= 1, "d_feat must be positive");
  require(s.alpha >= 0, "alpha must be non-negative");
  require(s.sigma >= 0, "sigma must be non-negative");
  require(s.silence_prob >= 0 && s.silence_prob <= 1, "silence_prob must be in [0, 1]");
  require(s.markov_peak >= 0, "markov_peak must be non-negative");
  require(s.confusion >= 0 && s.confusion <= 1, "confusion must be in [0, 1]");
}

Dataset synth(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const int n = spec.alphabet_size;
  Dataset data;
  for (int c = 0; c < n; ++c) data.chars.push_back(std::string(1, static_cast<char>('a' + c)));
  data.templates = normal_matrix(n + 1, spec.d_feat, rng);
  for (int c = 2; c <= n; c += 2)
    data.templates.row(c) = (1.0 - spec.confusion) * data.templates.row(c) +
                            spec.confusion * data.templates.row(c - 1);
  // One shift per (previous, current) pair; no shift after the boundary.
  data.shifts = normal_matrix((n + 1) * (n + 1), spec.d_feat, rng);
  data.shifts.topRows(n + 1).setZero();

  // transitions[prev] over next in 1..n; prev 0 is the utterance start.
  std::vector<std::vector<double>> transitions(n + 1);
  for (auto& row : transitions) {
    double total = 0;
    for (int c = 0; c < n; ++c) {
      total += std::exp(spec.markov_peak * rng.uniform());
      row.push_back(total);
    }
  }

  for (int u = 0; u < spec.samples; ++u) {
    Utterance utt;
    const int length = rng.uniform_int(spec.min_length, spec.max_length);
    int prev = 0;
    for (int i = 0; i < length; ++i) {
      const int c = 1 + draw(transitions[prev], rng);
      utt.transcript.push_back(c);
      prev = c;
    }
    std::vector<Eigen::RowVectorXd> frames;
    auto emit = [&](const Eigen::RowVectorXd& mean) {
      Eigen::RowVectorXd f = mean;
      for (Eigen::Index j = 0; j < f.size(); ++j) f(j) += spec.sigma * rng.normal();
      frames.push_back(f);
    };
    prev = 0;
    for (int i = 0; i < length; ++i) {
      if (i > 0 && rng.uniform() < spec.silence_prob) {
        const int pause = rng.uniform_int(1, 2);
        for (int k = 0; k < pause; ++k) emit(data.templates.row(0));
      }
      const int c = utt.transcript[i];
      const Eigen::RowVectorXd mean = data.templates.row(c) + spec.alpha * data.shifts.row(prev * (n + 1) + c);
      const int duration = rng.uniform_int(spec.min_duration, spec.max_duration);
      for (int k = 0; k < duration; ++k) emit(mean);
      prev = c;
    }
    utt.features.resize(static_cast<Eigen::Index>(frames.size()), spec.d_feat);
    for (std::size_t t = 0; t < frames.size(); ++t)
      utt.features.row(static_cast<Eigen::Index>(t)) = frames[t];
    data.utterances.push_back(std::move(utt));
  }
  return data;
}

void write_dataset(std::ostream& os, const Dataset& data) {
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  auto put_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        os << ' ';
        put(m(i, j));
      }
  };
  os << "chars";
  for (const auto& c : data.chars) os << ' ' << c;
  os << "\ntemplates " << data.templates.rows() << ' ' << data.templates.cols();
  put_matrix(data.templates);
  os << "\nshifts " << data.shifts.rows() << ' ' << data.shifts.cols();
  put_matrix(data.shifts);
  os << "\n";
  for (std::size_t u = 0; u < data.utterances.size(); ++u) {
    const Utterance& utt = data.utterances[u];
    os << u << '\t';
    for (int c : utt.transcript) os << data.chars[c - 1];
    os << '\t' << utt.features.rows() << '\t';
    put_matrix(utt.features);
    os << "\n";
  }
}

}  // namespace cdctc
