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

#include <algorithm>
#include <exception>
#include <vector>

#include "groundlab/nn/params.hpp"

namespace groundlab::nn {

// Gradient accumulation is split into this many contiguous chunks regardless of
// the thread count, so batch sums are reproducible on any machine.
inline constexpr int kGradChunks = 4;

/// Calls body(i, chunk_grad) for every i in [0, n). Each chunk owns a zeroed copy
/// of `prototype`; chunk buffers are added into `total` in chunk order.
template <typename G, typename Body>
void accumulate_chunks(int n, const G& prototype, G& total, Body&& body) {
  if (n <= 0) return;
  const int chunks = std::min(kGradChunks, n);
  std::vector<G> parts(static_cast<std::size_t>(chunks), zeros_like(prototype));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c) {
    try {
      const int lo = c * n / chunks, hi = (c + 1) * n / chunks;
      for (int i = lo; i < hi; ++i) body(i, parts[static_cast<std::size_t>(c)]);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const ParamList dst = params_of(total);
  for (auto& part : parts) accumulate(dst, params_of(part));
}

/// Runs body(i) for i in [0, n) in parallel, rethrowing the first failure by index.
template <typename Body>
void parallel_for(int n, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace groundlab::nn
