// cdctc/checkpoint.hpp

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

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cdctc {

// Named dense tensor; data is row-major.
struct Tensor {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> data;
};

// Text header "cdctc-checkpoint <count>" followed by one "name<TAB>rows<TAB>cols"
// line per tensor, then the little-endian float64 payloads in header order.
void write_checkpoint(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_checkpoint(const std::string& path);

template <typename Derived>
Tensor to_tensor(std::string name, const Eigen::MatrixBase<Derived>& m) {
  Tensor t{std::move(name), m.rows(), m.cols(), {}};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data.push_back(m(i, j));
  return t;
}

}  // namespace cdctc
