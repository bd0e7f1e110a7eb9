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

#include "groundlab/nn/adam.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "groundlab/core/error.hpp"

namespace groundlab::nn {

Real cosine_lr(long step, long total_steps, Real base_lr, Real min_lr) {
  if (total_steps <= 0 || step < 0 || step > total_steps) {
    throw Error(Errc::invalid_argument,
                "schedule step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  }
  const Real t = static_cast<Real>(step) / static_cast<Real>(total_steps);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

Adam::Adam(const ParamList& params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
  }
}

void Adam::step(const ParamList& params, const ParamList& grads, Real lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(Errc::shape_mismatch, "adam: parameter list changed");
  }
  ++t_;
  const Real b1 = config_.beta1, b2 = config_.beta2;
  const Real c1 = 1.0 - std::pow(b1, static_cast<Real>(t_));
  const Real c2 = 1.0 - std::pow(b2, static_cast<Real>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& w = *params[i].value;
    const Mat& g = *grads[i].value;
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
    w.array() -= lr * ((m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps) +
                       config_.weight_decay * w.array());
  }
}

}  // namespace groundlab::nn
