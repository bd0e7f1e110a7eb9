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
#include <cmath>
#include <filesystem>
#include <string>

#include "groundlab/core/random.hpp"
#include "groundlab/core/tensor.hpp"

namespace groundlab::test {

inline Mask random_mask(Rng& rng, int h, int w, double density) {
  Mask m(h, w);
  for (auto& b : m.bits) b = rng.bernoulli(density) ? 1 : 0;
  return m;
}

inline Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

/// |a - n| / max(|a|, |n|), or the absolute gap when both are below `floor`.
inline double rel_err(double a, double n, double floor = 1e-7) {
  const double s = std::max(std::abs(a), std::abs(n));
  return s < floor ? std::abs(a - n) : std::abs(a - n) / s;
}

/// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("groundlab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace groundlab::test

#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/scenegen/query.hpp"

namespace groundlab::test {

/// Small encoder over 128×128 images (8×8 patch grid) for fast tests.
inline dualenc::EncoderConfig small_encoder_config() {
  dualenc::EncoderConfig c;
  c.n_vision_blocks = 3;
  c.n_text_blocks = 2;
  c.d_model = 16;
  c.n_heads = 2;
  c.d_embed = 16;
  c.mlp_ratio = 2;
  c.taps = {1, 3};
  c.vocabulary = scenegen::grammar_vocabulary(scenegen::Catalog::standard());
  return c;
}

}  // namespace groundlab::test
