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

#include "groundlab/detector/detector.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "groundlab/core/error.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/kernels/kernels.hpp"
#include "groundlab/scenegen/dataset_io.hpp"

namespace groundlab::detector {

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u) || c == '-') {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Score-descending, then object id for a stable order.
void sort_candidates(std::vector<DetectionCandidate>& c) {
  std::stable_sort(c.begin(), c.end(), [](const DetectionCandidate& a, const DetectionCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.source_object < b.source_object;
  });
}

}  // namespace

void DetectorConfig::validate() const {
  if (top_k < 1) throw Error(Errc::invalid_argument, "detector top_k must be at least 1");
  if (max_radius < 0) throw Error(Errc::invalid_argument, "detector max_radius must be non-negative");
  if (score_noise < 0.0) throw Error(Errc::invalid_argument, "detector score_noise must be non-negative");
  if (!(iou_floor >= 0.0 && iou_floor <= 1.0)) throw Error(Errc::invalid_argument, "detector iou_floor must lie in [0, 1]");
  if (!(category_recall >= 0.0 && category_recall <= 1.0)) {
    throw Error(Errc::invalid_argument, "detector category_recall must lie in [0, 1]");
  }
}

nlohmann::json DetectorConfig::to_json() const {
  return {{"top_k", top_k},
          {"max_radius", max_radius},
          {"iou_floor", iou_floor},
          {"score_noise", score_noise},
          {"category_recall", category_recall}};
}

DetectorConfig DetectorConfig::from_json(const nlohmann::json& j) {
  DetectorConfig c;
  c.top_k = j.at("top_k").get<int>();
  c.max_radius = j.at("max_radius").get<int>();
  c.iou_floor = j.at("iou_floor").get<double>();
  c.score_noise = j.at("score_noise").get<double>();
  c.category_recall = j.at("category_recall").get<double>();
  return c;
}

nlohmann::json DetectionCandidate::to_json() const {
  return {{"score", score}, {"source_object", source_object}, {"mask", scenegen::encode_rle({mask})}};
}

std::optional<std::string> head_noun(std::string_view query_text, const scenegen::Catalog& catalog) {
  for (const auto& w : words(query_text)) {
    if (catalog.contains(w)) return w;
  }
  return std::nullopt;
}

Mask perturb_mask(const Mask& mask, const DetectorConfig& config, Rng& rng) {
  int r = config.max_radius > 0 ? rng.uniform_int(-config.max_radius, config.max_radius) : 0;
  while (r != 0) {
    Mask out = r > 0 ? kernels::omp::dilate(mask, r) : kernels::omp::erode(mask, -r);
    if (evalkit::iou(out, mask) >= config.iou_floor) return out;
    r += r > 0 ? -1 : 1;
  }
  return mask;
}

std::vector<DetectionCandidate> detect_topk(const scenegen::Scene& scene, std::string_view query_text,
                                            const DetectorConfig& config, Rng& rng,
                                            const scenegen::Catalog& catalog) {
  config.validate();
  std::vector<const scenegen::SceneObject*> pool;
  const auto noun = head_noun(query_text, catalog);
  std::string category = noun.value_or("");
  // The confusion draw happens unconditionally so the stream position does not
  // depend on the scene contents.
  const bool confused = !rng.bernoulli(config.category_recall);
  const std::uint64_t pick = rng.next_u64();
  if (noun && confused) {
    std::vector<std::string> others;
    for (const auto& o : scene.objects) {
      if (o.category.name != category &&
          std::find(others.begin(), others.end(), o.category.name) == others.end()) {
        others.push_back(o.category.name);
      }
    }
    std::sort(others.begin(), others.end());
    if (!others.empty()) category = others[pick % others.size()];
  }
  for (const auto& o : scene.objects) {
    if (!noun || o.category.name == category) pool.push_back(&o);
  }

  std::vector<DetectionCandidate> out;
  if (pool.empty()) return out;
  double max_area = 0.0;
  for (const auto* o : pool) max_area = std::max(max_area, static_cast<double>(o->gt_mask.area()));
  for (const auto* o : pool) {
    DetectionCandidate c;
    c.source_object = o->id;
    const double base = max_area > 0.0 ? static_cast<double>(o->gt_mask.area()) / max_area : 0.0;
    // Without a recognised noun the detector defaults to size alone.
    const double noise = noun ? config.score_noise * rng.normal() : 0.0;
    c.score = std::clamp(base + noise, 0.0, 1.0);
    c.mask = perturb_mask(o->gt_mask, config, rng);
    out.push_back(std::move(c));
  }
  sort_candidates(out);
  if (static_cast<int>(out.size()) > config.top_k) out.resize(static_cast<std::size_t>(config.top_k));
  return out;
}

HybridChoice hybrid_select(const Mask& reference, std::span<const DetectionCandidate> candidates) {
  HybridChoice choice;
  if (candidates.empty()) {
    choice.mask = reference;
    choice.warning = "hybrid_select: empty candidate list, keeping the decoder mask";
    return choice;
  }
  int best = -1;
  double best_iou = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    // Shared pixels are required; two empty masks do not count as overlapping.
    if (kernels::omp::overlap(candidates[i].mask, reference).intersection == 0) continue;
    const double v = evalkit::iou(candidates[i].mask, reference);
    if (best < 0 || v > best_iou ||
        (v == best_iou && candidates[i].score > candidates[static_cast<std::size_t>(best)].score)) {
      best = static_cast<int>(i);
      best_iou = v;
    }
  }
  if (best < 0) {
    choice.mask = reference;
    choice.warning = "hybrid_select: no candidate overlaps the decoder mask, keeping it";
    return choice;
  }
  choice.chosen = best;
  choice.overlap = best_iou;
  choice.mask = candidates[static_cast<std::size_t>(best)].mask;
  return choice;
}

}  // namespace groundlab::detector
