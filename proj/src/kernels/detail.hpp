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

#include <cmath>
#include <cstdint>

#include "groundlab/core/error.hpp"
#include "groundlab/core/tensor.hpp"

namespace groundlab::kernels::detail {

inline Real pixel_value(std::uint8_t v) { return (static_cast<Real>(v) / 255.0 - 0.5) / 0.25; }

inline void check_same_shape(const Mask& a, const Mask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(Errc::shape_mismatch, "mask shapes differ");
  }
}

inline double bce_pixel(double l0, double l1, std::uint8_t g, double eps, double& p) {
  p = 1.0 / (1.0 + std::exp(l0 - l1));
  const double pc = std::min(std::max(p, eps), 1.0 - eps);
  return g ? -std::log(pc) : -std::log(1.0 - pc);
}

// Disk membership for the morphology kernels.
inline bool in_disk(int dy, int dx, int r) { return dy * dy + dx * dx <= r * r; }

}  // namespace groundlab::kernels::detail
