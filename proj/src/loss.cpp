// cdctc/loss.cpp

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

#include "cdctc/loss.hpp"

namespace cdctc {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ctc") return LossKind::kCtc;
  if (name == "ctc-g") return LossKind::kCtcG;
  if (name == "ctc-gb") return LossKind::kCtcGB;
  throw Error("unknown loss kind '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kCtc: return "ctc";
    case LossKind::kCtcG: return "ctc-g";
    case LossKind::kCtcGB: return "ctc-gb";
  }
  return "?";
}

}  // namespace cdctc
