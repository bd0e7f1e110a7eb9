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

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/tensor.hpp"

namespace groundlab::evalkit {

/// |pred ∧ gt| / |pred ∨ gt|. Two empty masks agree perfectly (1.0).
/// Throws shape-mismatch.
double iou(const Mask& pred, const Mask& gt);

/// 100 · |{i : ious[i] > x/100}| / N. Throws no-samples on an empty list and
/// invalid-argument when x is outside (0, 100).
double precision_at(std::span<const double> ious, double x);

struct MetricsConfig {
  std::vector<double> thresholds{50, 60, 70, 80, 90};
  /// When false, samples whose ground truth is empty are skipped.
  bool score_empty_gt = true;

  /// Throws invalid-argument unless thresholds are strictly increasing in (0, 100).
  void validate() const;
  nlohmann::json to_json() const;
  static MetricsConfig from_json(const nlohmann::json& j);
  friend bool operator==(const MetricsConfig&, const MetricsConfig&) = default;
};

}  // namespace groundlab::evalkit
