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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/scenegen/dataset.hpp"

namespace groundlab::evalkit {

inline constexpr int kReportVersion = 1;

/// Mask for one labelled sample. Must be safe to call concurrently.
using Predictor = std::function<Mask(const scenegen::LabeledSample&)>;

struct ModelIdentity {
  std::string tag;
  std::string checkpoint_fingerprint;  // empty for checkpoint-free predictors
  std::string dataset_hash;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static ModelIdentity from_json(const nlohmann::json& j);
  friend bool operator==(const ModelIdentity&, const ModelIdentity&) = default;
};

struct SampleScore {
  int sample_id = 0;
  int attributes = 0;  // extracted attribute count, 1..4 for grammar text (5 possible)
  double iou = 0.0;
  friend bool operator==(const SampleScore&, const SampleScore&) = default;
};

struct BucketStat {
  int attributes = 0;
  int count = 0;
  std::optional<double> mean_iou;  // unset when the bucket is empty
  friend bool operator==(const BucketStat&, const BucketStat&) = default;
};

struct MetricsReport {
  ModelIdentity identity;
  std::string split;
  MetricsConfig config;
  int n = 0;
  double mean_iou = 0.0;
  std::vector<double> precision;   // P@X for config.thresholds, percent
  std::vector<BucketStat> buckets;  // A = 1..4
  std::vector<SampleScore> samples;  // ordered by sample id
  /// Free-form summary (SA, hybrid fallbacks, ...) carried into the record.
  nlohmann::json extra = nlohmann::json::object();

  /// Mean IoU over samples with at least `min_attributes`; unset when none.
  std::optional<double> mean_iou_from(int min_attributes) const;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Scores every sample, then aggregates in sample-id order. Throws
/// fingerprint-mismatch when identity.dataset_hash differs from `dataset_hash`,
/// no-samples on an empty split.
MetricsReport evaluate(const Predictor& predictor, std::span<const scenegen::LabeledSample> samples,
                       std::string_view split_name, const std::string& dataset_hash, const ModelIdentity& identity,
                       const scenegen::Catalog& catalog, const MetricsConfig& config = {});

/// Mean IoU per attribute count from per-sample scores (A = 1..4).
std::vector<BucketStat> bucket_means(std::span<const SampleScore> samples);

}  // namespace groundlab::evalkit
