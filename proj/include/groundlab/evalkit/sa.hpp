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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/random.hpp"
#include "groundlab/scenegen/attributes.hpp"
#include "groundlab/scenegen/catalog.hpp"
#include "groundlab/scenegen/scene.hpp"

namespace groundlab::evalkit {

/// IoU against the target at or above which an attempt counts as correct.
inline constexpr double kSaSuccessIou = 0.5;

struct SaAttempt {
  scenegen::AttributeSet attributes;
  std::string text;
  double iou = 0.0;
  bool success = false;
};

struct SaTrial {
  int scene_id = 0;
  int target_id = 0;
  scenegen::AttributeSet mrq;
  std::vector<SaAttempt> attempts;  // first one is the MRQ
};

/// 100 when the MRQ attempt succeeds, minus 25 per extra attribute needed by
/// the first success, 0 when nothing up to four attributes succeeds. Throws
/// protocol-violation when the first attempt is not the MRQ.
double sa_score(const SaTrial& trial);
/// Mean over trials; throws no-samples on an empty list.
double sa_score(std::span<const SaTrial> trials);

/// Segments the query text against the trial scene.
using TextSegmenter = std::function<Mask(const std::string& text)>;

/// Starts from the MRQ and adds one attribute the target has (color, size,
/// shape, position in that order) per failed attempt, up to four attributes.
SaTrial run_sa_trial(const scenegen::Scene& scene, int target_id, const TextSegmenter& segment, Rng& rng,
                     const scenegen::Catalog& catalog);

nlohmann::json to_json(const SaTrial& trial);

}  // namespace groundlab::evalkit
