// cdctc/config.cpp

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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "cdctc/harness.hpp"

namespace cdctc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw Error("config: bad value for " + key + ": '" + value + "'");
  return out;
}

std::vector<double> parse_grid(const std::string& key, const std::string& value) {
  std::vector<double> grid;
  std::istringstream is(value);
  for (std::string item; std::getline(is, item, ',');)
    grid.push_back(parse_number<double>(key, trim(item)));
  return grid;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BlankMode parse_blank_mode(const std::string& v) {
  if (v == "single") return BlankMode::kSingle;
  if (v == "cd") return BlankMode::kContextDependent;
  throw Error("config: blank_mode must be single or cd, got '" + v + "'");
}

}  // namespace

Topology parse_topology(std::string_view name) {
  if (name == "ci") return Topology::kCi;
  if (name == "bichar") return Topology::kBichar;
  if (name == "trichar") return Topology::kTrichar;
  throw Error("unknown topology '" + std::string(name) + "' (ci, bichar, trichar)");
}

std::string_view topology_name(Topology topology) {
  switch (topology) {
    case Topology::kCi: return "ci";
    case Topology::kBichar: return "bichar";
    case Topology::kTrichar: return "trichar";
  }
  return "?";
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<int>(k, v); };
  };
  auto long_int = [](long& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<long>(k, v); };
  };
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_number<double>(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"topology", [&](auto&, const std::string& v) { c.topology = parse_topology(v); }},
      {"blank_mode", [&](auto&, const std::string& v) { c.blank_mode = parse_blank_mode(v); }},
      {"loss", [&](auto&, const std::string& v) { c.loss = parse_loss_kind(v); }},
      {"scoring", [&](auto&, const std::string& v) { c.scoring = parse_scoring_kind(v); }},
      {"allowed", [&](auto&, const std::string& v) { c.allowed = v; }},
      {"alphabet_size", integer(c.synth.alphabet_size)},
      {"samples", integer(c.synth.samples)},
      {"min_length", integer(c.synth.min_length)},
      {"max_length", integer(c.synth.max_length)},
      {"min_duration", integer(c.synth.min_duration)},
      {"max_duration", integer(c.synth.max_duration)},
      {"d_feat", [&](const std::string& k, const std::string& v) {
         c.synth.d_feat = c.model.d_feat = parse_number<int>(k, v);
       }},
      {"alpha", real(c.synth.alpha)},
      {"sigma", real(c.synth.sigma)},
      {"silence_prob", real(c.synth.silence_prob)},
      {"markov_peak", real(c.synth.markov_peak)},
      {"confusion", real(c.synth.confusion)},
      {"data_seed", [&](const std::string& k, const std::string& v) {
         c.synth.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"window", integer(c.model.window)},
      {"d_hidden", integer(c.model.d_hidden)},
      {"d_proto", integer(c.model.d_proto)},
      {"d_emb", integer(c.model.d_emb)},
      {"cde_hidden", integer(c.model.cde_hidden)},
      {"lr", real(c.adam.lr)},
      {"halve_every", long_int(c.adam.halve_every)},
      {"halve_start", long_int(c.adam.halve_start)},
      {"steps", long_int(c.steps)},
      {"batch", integer(c.batch)},
      {"eval_every", long_int(c.eval_every)},
      {"lm_order", integer(c.lm_order)},
      {"kappa", real(c.kappa)},
      {"kappa_grid", [&](const std::string& k, const std::string& v) { c.kappa_grid = parse_grid(k, v); }},
      {"seed", [&](const std::string& k, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(k, v);
       }},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  return c;
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  return parse_config(is);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << "topology = " << topology_name(c.topology) << "\n"
     << "blank_mode = " << (c.blank_mode == BlankMode::kSingle ? "single" : "cd") << "\n"
     << "loss = " << loss_kind_name(c.loss) << "\n"
     << "scoring = " << scoring_kind_name(c.scoring) << "\n";
  if (!c.allowed.empty()) os << "allowed = " << c.allowed << "\n";
  os << "alphabet_size = " << c.synth.alphabet_size << "\n"
     << "samples = " << c.synth.samples << "\n"
     << "min_length = " << c.synth.min_length << "\n"
     << "max_length = " << c.synth.max_length << "\n"
     << "min_duration = " << c.synth.min_duration << "\n"
     << "max_duration = " << c.synth.max_duration << "\n"
     << "d_feat = " << c.synth.d_feat << "\n"
     << "alpha = " << format_double(c.synth.alpha) << "\n"
     << "sigma = " << format_double(c.synth.sigma) << "\n"
     << "silence_prob = " << format_double(c.synth.silence_prob) << "\n"
     << "markov_peak = " << format_double(c.synth.markov_peak) << "\n"
     << "confusion = " << format_double(c.synth.confusion) << "\n"
     << "data_seed = " << c.synth.seed << "\n"
     << "window = " << c.model.window << "\n"
     << "d_hidden = " << c.model.d_hidden << "\n"
     << "d_proto = " << c.model.d_proto << "\n"
     << "d_emb = " << c.model.d_emb << "\n"
     << "cde_hidden = " << c.model.cde_hidden << "\n"
     << "lr = " << format_double(c.adam.lr) << "\n"
     << "halve_every = " << c.adam.halve_every << "\n"
     << "halve_start = " << c.adam.halve_start << "\n"
     << "steps = " << c.steps << "\n"
     << "batch = " << c.batch << "\n"
     << "eval_every = " << c.eval_every << "\n"
     << "lm_order = " << c.lm_order << "\n"
     << "kappa = " << format_double(c.kappa) << "\n"
     << "kappa_grid = ";
  for (std::size_t i = 0; i < c.kappa_grid.size(); ++i)
    os << (i ? "," : "") << format_double(c.kappa_grid[i]);
  os << "\nseed = " << c.seed << "\n";
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error("config: " + what);
  };
  validate(c.synth);
  const bool cd_blank = c.blank_mode == BlankMode::kContextDependent;
  require(!cd_blank || c.topology == Topology::kBichar,
          "blank_mode = cd is only defined for topology = bichar");
  require(c.loss != LossKind::kCtcGB || cd_blank,
          "loss = ctc-gb requires blank_mode = cd (and topology = bichar)");
  require(!cd_blank || c.loss == LossKind::kCtcGB,
          "blank_mode = cd is trained with loss = ctc-gb; set loss = ctc-gb or blank_mode = single");
  require(c.topology != Topology::kTrichar || !c.allowed.empty(),
          "topology = trichar requires an allowed-set file (allowed = <path>)");
  require(c.topology == Topology::kTrichar || c.allowed.empty(),
          "allowed is only used with topology = trichar");
  require(c.scoring != ScoringKind::kCde || c.topology != Topology::kCi,
          "scoring = cde needs context-dependent symbols; use topology = bichar or trichar");
  require(c.model.d_feat == c.synth.d_feat, "model and data feature dimensions differ");
  require(c.model.window >= 0, "window must be non-negative");
  require(c.model.d_hidden > 0 && c.model.d_proto > 0 && c.model.d_emb > 0 &&
              c.model.cde_hidden > 0,
          "model dimensions must be positive");
  require(c.adam.lr >= 0, "lr must be non-negative");
  require(c.adam.halve_every >= 0 && c.adam.halve_start >= 0, "halving schedule must be non-negative");
  require(c.steps >= 0, "steps must be non-negative");
  require(c.batch >= 1, "batch must be positive");
  require(c.eval_every >= 1, "eval_every must be positive");
  require(c.lm_order == 2 || c.lm_order == 3, "lm_order must be 2 or 3");
  require(c.kappa > 0, "kappa must be positive");
  require(!c.kappa_grid.empty(), "kappa_grid must not be empty");
  for (double k : c.kappa_grid) require(k > 0, "kappa_grid values must be positive");
}

void set_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.synth.seed = seed;
}

}  // namespace cdctc
