// cdctc/checkpoint.cpp

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

#include "cdctc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cdctc/common.hpp"

namespace cdctc {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int k = 0; k < 8; ++k) out |= ((v >> (8 * k)) & 0xffu) << (8 * (7 - k));
  return out;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::vector<Tensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << "cdctc-checkpoint " << tensors.size() << '\n';
  for (const Tensor& t : tensors) {
    if (static_cast<Eigen::Index>(t.data.size()) != t.rows * t.cols)
      throw Error("checkpoint: tensor " + t.name + " has inconsistent shape");
    out << t.name << '\t' << t.rows << '\t' << t.cols << '\n';
  }
  for (const Tensor& t : tensors) {
    for (double v : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      bits = to_little_endian(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw Error("checkpoint: write failed for " + path);
}

std::vector<Tensor> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::string line;
  std::getline(in, line);
  std::istringstream head(line);
  std::string magic;
  std::size_t count = 0;
  if (!(head >> magic >> count) || magic != "cdctc-checkpoint")
    throw Error("checkpoint: bad header in " + path);
  std::vector<Tensor> tensors(count);
  for (Tensor& t : tensors) {
    if (!std::getline(in, line)) throw Error("checkpoint: truncated header");
    std::istringstream ss(line);
    if (!(ss >> t.name >> t.rows >> t.cols) || t.rows < 0 || t.cols < 0)
      throw Error("checkpoint: bad tensor line '" + line + "'");
  }
  for (Tensor& t : tensors) {
    t.data.resize(static_cast<std::size_t>(t.rows * t.cols));
    for (double& v : t.data) {
      std::uint64_t bits;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
        throw Error("checkpoint: truncated payload for " + t.name);
      bits = to_little_endian(bits);
      std::memcpy(&v, &bits, sizeof v);
    }
  }
  return tensors;
}

}  // namespace cdctc
