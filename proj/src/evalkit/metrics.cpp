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

#include "groundlab/evalkit/metrics.hpp"

#include <string>

#include "groundlab/core/error.hpp"
#include "groundlab/kernels/kernels.hpp"

namespace groundlab::evalkit {

double iou(const Mask& pred, const Mask& gt) {
  const auto o = kernels::omp::overlap(pred, gt);
  if (o.uni == 0) return 1.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.uni);
}

double precision_at(std::span<const double> ious, double x) {
  if (ious.empty()) throw Error(Errc::no_samples, "precision_at needs at least one IoU");
  if (!(x > 0.0 && x < 100.0)) throw Error(Errc::invalid_argument, "threshold must lie in (0, 100)");
  const double t = x / 100.0;
  std::size_t hits = 0;
  for (double v : ious) {
    if (v > t) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ious.size());
}

void MetricsConfig::validate() const {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 100.0)) {
      throw Error(Errc::invalid_argument, "threshold " + std::to_string(thresholds[i]) + " outside (0, 100)");
    }
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
      throw Error(Errc::invalid_argument, "thresholds must be strictly increasing");
    }
  }
}

nlohmann::json MetricsConfig::to_json() const {
  return {{"thresholds", thresholds}, {"score_empty_gt", score_empty_gt}};
}

MetricsConfig MetricsConfig::from_json(const nlohmann::json& j) {
  MetricsConfig c;
  c.thresholds = j.at("thresholds").get<std::vector<double>>();
  c.score_empty_gt = j.at("score_empty_gt").get<bool>();
  return c;
}

}  // namespace groundlab::evalkit
