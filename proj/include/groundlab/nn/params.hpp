// Copyright 2026 The groundlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "groundlab/core/tensor.hpp"

namespace groundlab::nn {

struct ParamRef {
  std::string name;
  Mat* value;
};

/// Parameters in a fixed, module-defined order. Two lists collected from
/// modules of identical structure line up entry by entry.
using ParamList = std::vector<ParamRef>;

std::size_t count_params(const ParamList& params);
void zero(const ParamList& params);
/// dst += scale * src, entry by entry.
void accumulate(const ParamList& dst, const ParamList& src, Real scale = 1.0);
/// Raw little-endian bytes of every tensor, in order; used for fingerprints.
std::string fingerprint(const ParamList& params);

/// Any module exposing `collect(ParamList&, const std::string&)`.
template <typename M>
ParamList params_of(M& module, const std::string& prefix = "") {
  ParamList out;
  module.collect(out, prefix);
  return out;
}

template <typename M>
ParamList params_of(const M& module, const std::string& prefix = "") {
  return params_of(const_cast<M&>(module), prefix);
}

/// Same structure as `module`, all parameters zero. Used as a gradient buffer.
template <typename M>
M zeros_like(const M& module) {
  M copy = module;
  zero(params_of(copy));
  return copy;
}

}  // namespace groundlab::nn
