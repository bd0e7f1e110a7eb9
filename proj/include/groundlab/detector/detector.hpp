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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/random.hpp"
#include "groundlab/core/tensor.hpp"
#include "groundlab/scenegen/catalog.hpp"
#include "groundlab/scenegen/scene.hpp"

namespace groundlab::detector {

struct DetectorConfig {
  int top_k = 3;
  /// Boundary radius drawn uniformly from [-max_radius, max_radius]; negative erodes.
  int max_radius = 2;
  /// Perturbed masks keep at least this IoU with the original.
  double iou_floor = 0.7;
  /// Standard deviation of the additive score noise.
  double score_noise = 0.1;
  /// Probability the queried category is recognised.
  double category_recall = 0.9;

  /// Throws invalid-argument on top_k < 1, negative noise or probabilities outside [0, 1].
  void validate() const;
  nlohmann::json to_json() const;
  static DetectorConfig from_json(const nlohmann::json& j);
  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct DetectionCandidate {
  Mask mask;
  double score = 0.0;
  int source_object = -1;  // diagnostics only

  nlohmann::json to_json() const;  // mask as RLE
  friend bool operator==(const DetectionCandidate&, const DetectionCandidate&) = default;
};

/// First catalog category word in the text, if any.
std::optional<std::string> head_noun(std::string_view query_text, const scenegen::Catalog& catalog);

/// Dilation or erosion by a random radius, backed off toward zero until the
/// result keeps `iou_floor` overlap with the input.
Mask perturb_mask(const Mask& mask, const DetectorConfig& config, Rng& rng);

/// Attribute-blind candidates for the query's head noun, sorted by descending
/// score. Unknown nouns fall back to the largest objects in the scene.
std::vector<DetectionCandidate> detect_topk(const scenegen::Scene& scene, std::string_view query_text,
                                            const DetectorConfig& config, Rng& rng,
                                            const scenegen::Catalog& catalog);

struct HybridChoice {
  Mask mask;
  /// Index into the candidate list, or -1 when the reference mask was kept.
  int chosen = -1;
  double overlap = 0.0;
  std::string warning;  // empty unless a fallback fired
};

/// Candidate with the highest IoU against `reference`; ties go to the higher
/// score, then the lower index. Keeps `reference` when the list is empty or no
/// candidate overlaps it at all.
HybridChoice hybrid_select(const Mask& reference, std::span<const DetectionCandidate> candidates);

}  // namespace groundlab::detector
