// cdctc/tests/util.hpp

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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "cdctc/alphabet.hpp"
#include "cdctc/common.hpp"
#include "cdctc/forward_backward.hpp"

namespace cdctc::test {

inline CdAlphabet ab() { return CdAlphabet::ci({"a", "b"}); }

inline ScoreMatrix<double> random_scores(int frames, int width, Rng& rng,
                                         double scale = 1.0) {
  ScoreMatrix<double> s(frames, width);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = scale * rng.normal();
  return s;
}

inline std::vector<int> random_transcript(int length, int num_chars, Rng& rng) {
  std::vector<int> y(length);
  for (int& c : y) c = rng.uniform_int(1, num_chars);
  return y;
}

// Ids by name, e.g. ids(alphabet, {"∅a", "ab"}).
inline std::vector<int> ids(const CdAlphabet& a, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) {
    bool found = false;
    for (int id : a.usable_ids()) {
      if (a.name(id) == n) {
        out.push_back(id);
        found = true;
        break;
      }
    }
    if (!found) throw Error("test: no symbol named " + n);
  }
  return out;
}

inline int id(const CdAlphabet& a, const std::string& name) { return ids(a, {name}).front(); }

inline std::filesystem::path work_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(CDCTC_WORK_DIR) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace cdctc::test
