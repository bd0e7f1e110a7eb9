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

#include "groundlab/nn/params.hpp"

#include <cstring>

#include "groundlab/core/error.hpp"
#include "groundlab/core/hash.hpp"

namespace groundlab::nn {

std::size_t count_params(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += static_cast<std::size_t>(p.value->size());
  return n;
}

void zero(const ParamList& params) {
  for (const auto& p : params) p.value->setZero();
}

void accumulate(const ParamList& dst, const ParamList& src, Real scale) {
  if (dst.size() != src.size()) throw Error(Errc::shape_mismatch, "parameter lists differ");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (scale == 1.0) {
      *dst[i].value += *src[i].value;
    } else {
      *dst[i].value += scale * *src[i].value;
    }
  }
}

std::string fingerprint(const ParamList& params) {
  Sha256 h;
  for (const auto& p : params) {
    h.update(p.name);
    const std::int64_t shape[2] = {p.value->rows(), p.value->cols()};
    h.update(shape, sizeof(shape));
    h.update(p.value->data(), sizeof(Real) * static_cast<std::size_t>(p.value->size()));
  }
  return h.hex_digest();
}

}  // namespace groundlab::nn
