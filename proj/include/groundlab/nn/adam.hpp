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

#include <vector>

#include "groundlab/nn/params.hpp"

namespace groundlab::nn {

struct AdamConfig {
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
  Real weight_decay = 0.0;
};

/// Cosine decay from base_lr at step 0 to min_lr at total_steps.
Real cosine_lr(long step, long total_steps, Real base_lr, Real min_lr);

class Adam {
 public:
  Adam(const ParamList& params, AdamConfig config);

  /// One update with the given learning rate; grads must line up with params.
  void step(const ParamList& params, const ParamList& grads, Real lr);
  long steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  long t_ = 0;
};

}  // namespace groundlab::nn
