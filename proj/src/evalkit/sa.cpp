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

#include "groundlab/evalkit/sa.hpp"

#include "groundlab/core/error.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/scenegen/mrq.hpp"
#include "groundlab/scenegen/query.hpp"

namespace groundlab::evalkit {

double sa_score(const SaTrial& trial) {
  if (trial.attempts.empty() || trial.attempts.front().attributes != trial.mrq) {
    throw Error(Errc::protocol_violation, "first attempt of trial on scene " + std::to_string(trial.scene_id) +
                                              " is not the minimal referring query");
  }
  const int base = trial.mrq.count();
  for (const auto& a : trial.attempts) {
    if (a.attributes.count() > 4) break;
    if (a.success) return 100.0 - 25.0 * (a.attributes.count() - base);
  }
  return 0.0;
}

double sa_score(std::span<const SaTrial> trials) {
  if (trials.empty()) throw Error(Errc::no_samples, "no SA trials");
  double total = 0.0;
  for (const auto& t : trials) total += sa_score(t);
  return total / static_cast<double>(trials.size());
}

SaTrial run_sa_trial(const scenegen::Scene& scene, int target_id, const TextSegmenter& segment, Rng& rng,
                     const scenegen::Catalog& catalog) {
  const auto* target = scene.object(target_id);
  if (!target) throw Error(Errc::invalid_argument, "no object " + std::to_string(target_id) + " in scene");
  SaTrial trial;
  trial.scene_id = scene.id;
  trial.target_id = target_id;
  trial.mrq = scenegen::compute_mrq(scene, target_id, catalog);

  scenegen::AttributeSet attrs = trial.mrq;
  const auto positions = scenegen::positions_of(scene, *target);
  while (true) {
    SaAttempt a;
    a.attributes = attrs;
    a.text = scenegen::render_query_text(attrs, rng.uniform_int(0, scenegen::kTemplateCount - 1));
    a.iou = iou(segment(a.text), target->gt_mask);
    a.success = a.iou >= kSaSuccessIou;
    trial.attempts.push_back(a);
    if (a.success || attrs.count() >= 4) break;
    if (!attrs.color) {
      attrs.color = target->color;
    } else if (!attrs.size) {
      attrs.size = target->size;
    } else if (!attrs.shape) {
      attrs.shape = target->shape;
    } else if (!attrs.position && !positions.empty()) {
      attrs.position = positions.front();
    } else {
      break;
    }
  }
  return trial;
}

nlohmann::json to_json(const SaTrial& trial) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : trial.attempts) {
    attempts.push_back({{"attributes", scenegen::to_json(a.attributes)},
                        {"text", a.text},
                        {"iou", a.iou},
                        {"success", a.success}});
  }
  return {{"scene_id", trial.scene_id},
          {"target_id", trial.target_id},
          {"mrq", scenegen::to_json(trial.mrq)},
          {"attempts", attempts},
          {"sa", sa_score(trial)}};
}

}  // namespace groundlab::evalkit
