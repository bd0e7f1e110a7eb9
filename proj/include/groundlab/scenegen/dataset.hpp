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

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/tensor.hpp"
#include "groundlab/scenegen/catalog.hpp"
#include "groundlab/scenegen/query.hpp"
#include "groundlab/scenegen/scene.hpp"

namespace groundlab::scenegen {

enum class SplitName { train, test_seen, test_unseen };
std::string_view to_string(SplitName s);

struct DatasetConfig {
  std::uint64_t master_seed = 13;
  int image_size = 128;
  int n_train = 800;
  int n_test_seen = 200;
  int n_test_unseen = 200;
  std::vector<std::string> unseen_categories{"container", "sprayer", "wrench", "multimeter"};
  /// Target share of queries with A = 1..4 attributes.
  std::vector<double> attribute_mix{0.25, 0.25, 0.25, 0.25};
  int min_categories = 2;
  int max_categories = 4;
  /// Attribute sharing between same-category instances, indexed by A-1.
  std::vector<double> attribute_share{0.0, 0.3, 0.6, 0.85};
  int max_scene_attempts = 80;

  nlohmann::json to_json() const;
  static DatasetConfig from_json(const nlohmann::json& j);
  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct LabeledSample {
  int sample_id = 0;
  SplitName split = SplitName::train;
  int scene_id = 0;
  Image image;
  ReferringQuery query;
  Mask gt_mask;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test_seen;
  std::vector<LabeledSample> test_unseen;
  std::vector<Scene> scenes;  // sorted by id
  Catalog catalog;
  std::vector<std::string> vocabulary;
  DatasetConfig config;

  const Scene& scene(int scene_id) const;
  const std::vector<LabeledSample>& split(SplitName s) const;
  /// Hash over config, catalog and every sample (text, attributes, pixels, masks).
  std::string content_hash() const;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Generates all three splits. Throws infeasible-mixture naming the split and
/// attribute bucket that could not be filled.
DatasetSplit build_dataset(const DatasetConfig& config, const Catalog& catalog = Catalog::standard());

/// Bucket (1..4) assigned to each slot of a split of length n: largest running
/// deficit against the mixture, ties to the smaller bucket.
std::vector<int> assign_buckets(int n, const std::vector<double>& mix);

}  // namespace groundlab::scenegen
