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

#include "groundlab/evalkit/evaluate.hpp"

#include <algorithm>

#include "groundlab/core/error.hpp"
#include "groundlab/evalkit/attributes.hpp"
#include "groundlab/nn/parallel.hpp"

namespace groundlab::evalkit {

nlohmann::json ModelIdentity::to_json() const {
  return {{"tag", tag}, {"checkpoint_fingerprint", checkpoint_fingerprint}, {"dataset_hash", dataset_hash},
          {"seed", seed}};
}

ModelIdentity ModelIdentity::from_json(const nlohmann::json& j) {
  ModelIdentity m;
  m.tag = j.at("tag").get<std::string>();
  m.checkpoint_fingerprint = j.at("checkpoint_fingerprint").get<std::string>();
  m.dataset_hash = j.at("dataset_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

std::optional<double> MetricsReport::mean_iou_from(int min_attributes) const {
  double total = 0.0;
  int count = 0;
  for (const auto& s : samples) {
    if (std::min(s.attributes, 4) < min_attributes) continue;
    total += s.iou;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json b = nlohmann::json::array();
  for (const auto& s : buckets) {
    b.push_back({{"attributes", s.attributes},
                 {"count", s.count},
                 {"mean_iou", s.mean_iou ? nlohmann::json(*s.mean_iou) : nlohmann::json(nullptr)}});
  }
  nlohmann::json ids = nlohmann::json::array();
  nlohmann::json atts = nlohmann::json::array();
  nlohmann::json ious = nlohmann::json::array();
  for (const auto& s : samples) {
    ids.push_back(s.sample_id);
    atts.push_back(s.attributes);
    ious.push_back(s.iou);
  }
  return {{"identity", identity.to_json()},
          {"split", split},
          {"metrics_config", config.to_json()},
          {"n", n},
          {"mean_iou", mean_iou},
          {"precision", precision},
          {"buckets", b},
          {"samples", {{"sample_id", ids}, {"attributes", atts}, {"iou", ious}}},
          {"extra", extra}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.identity = ModelIdentity::from_json(j.at("identity"));
  r.split = j.at("split").get<std::string>();
  r.config = MetricsConfig::from_json(j.at("metrics_config"));
  r.n = j.at("n").get<int>();
  r.mean_iou = j.at("mean_iou").get<double>();
  r.precision = j.at("precision").get<std::vector<double>>();
  for (const auto& b : j.at("buckets")) {
    BucketStat s;
    s.attributes = b.at("attributes").get<int>();
    s.count = b.at("count").get<int>();
    if (!b.at("mean_iou").is_null()) s.mean_iou = b.at("mean_iou").get<double>();
    r.buckets.push_back(s);
  }
  const auto& s = j.at("samples");
  const auto ids = s.at("sample_id").get<std::vector<int>>();
  const auto atts = s.at("attributes").get<std::vector<int>>();
  const auto ious = s.at("iou").get<std::vector<double>>();
  if (ids.size() != atts.size() || ids.size() != ious.size()) {
    throw Error(Errc::shape_mismatch, "report sample columns differ in length");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) r.samples.push_back({ids[i], atts[i], ious[i]});
  r.extra = j.at("extra");
  return r;
}

std::vector<BucketStat> bucket_means(std::span<const SampleScore> samples) {
  std::vector<BucketStat> out(4);
  std::vector<double> sums(4, 0.0);
  for (int a = 0; a < 4; ++a) out[static_cast<std::size_t>(a)].attributes = a + 1;
  for (const auto& s : samples) {
    // Grammar text never exceeds four; anything beyond joins the top bucket.
    const auto k = static_cast<std::size_t>(std::clamp(s.attributes, 1, 4) - 1);
    ++out[k].count;
    sums[k] += s.iou;
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (out[k].count > 0) out[k].mean_iou = sums[k] / out[k].count;
  }
  return out;
}

MetricsReport evaluate(const Predictor& predictor, std::span<const scenegen::LabeledSample> samples,
                       std::string_view split_name, const std::string& dataset_hash, const ModelIdentity& identity,
                       const scenegen::Catalog& catalog, const MetricsConfig& config) {
  config.validate();
  if (identity.dataset_hash != dataset_hash) {
    throw Error(Errc::fingerprint_mismatch, "model " + identity.tag + " was bound to dataset " +
                                                identity.dataset_hash + ", evaluating on " + dataset_hash);
  }
  std::vector<const scenegen::LabeledSample*> order;
  for (const auto& s : samples) {
    if (config.score_empty_gt || !s.gt_mask.empty_foreground()) order.push_back(&s);
  }
  if (order.empty()) throw Error(Errc::no_samples, "nothing to evaluate in split " + std::string(split_name));
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->sample_id < b->sample_id; });

  std::vector<SampleScore> scores(order.size());
  nn::parallel_for(static_cast<int>(order.size()), [&](int i) {
    const auto& s = *order[static_cast<std::size_t>(i)];
    scores[static_cast<std::size_t>(i)] = {s.sample_id, extract_attributes(s.query.text, catalog).count(),
                                           iou(predictor(s), s.gt_mask)};
  });

  MetricsReport r;
  r.identity = identity;
  r.split = std::string(split_name);
  r.config = config;
  r.n = static_cast<int>(scores.size());
  std::vector<double> ious;
  ious.reserve(scores.size());
  double total = 0.0;
  for (const auto& s : scores) {
    ious.push_back(s.iou);
    total += s.iou;
  }
  r.mean_iou = total / static_cast<double>(scores.size());
  for (double x : config.thresholds) r.precision.push_back(precision_at(ious, x));
  r.buckets = bucket_means(scores);
  r.samples = std::move(scores);
  return r;
}

}  // namespace groundlab::evalkit
