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
#include <optional>
#include <string>
#include <vector>

#include "groundlab/core/tensor.hpp"
#include "groundlab/scenegen/catalog.hpp"

namespace groundlab::scenegen {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct SceneObject {
  int id = 0;
  ObjectCategory category;
  Color color = Color::red;
  ShapeDescriptor shape = ShapeDescriptor::round;
  SizeClass size = SizeClass::small;
  Point center;
  double radius = 0.0;
  bool vertical = false;  // long axis orientation for elongated glyphs
  int z_order = 0;        // higher occludes lower
  Mask gt_mask;           // visible pixels only

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  int id = 0;
  int height = 128;
  int width = 128;
  std::vector<SceneObject> objects;
  int clutter_level = 1;
  Lighting lighting = Lighting::bright;
  std::uint64_t master_seed = 0;

  const SceneObject* object(int object_id) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct SceneConfig {
  int height = 128;
  int width = 128;
  int clutter_level = 1;
  std::vector<std::string> categories;
  std::vector<Color> palette{kAllColors.begin(), kAllColors.end()};
  std::optional<Lighting> lighting;  // random when unset
  /// Probability that a same-category instance copies each attribute of the
  /// first instance; raises the number of attributes needed to disambiguate.
  double attribute_share = 0.0;
  double small_radius_min = 9.0;
  double small_radius_max = 11.5;
  double large_radius_min = 14.0;
  double large_radius_max = 17.0;
  /// Largest fraction of an object's footprint that may be hidden.
  double max_occlusion = 0.5;
  int max_retries = 200;
  /// Zero objects is only legal when set (tests).
  bool allow_empty = false;
};

/// Deterministic in (config, seed). Throws placement-failed when an object
/// cannot be placed within the occlusion limit after max_retries attempts.
Scene generate_scene(const SceneConfig& config, std::uint64_t seed, const Catalog& catalog,
                     int scene_id = 0);

/// Canonical byte serialisation (metadata + masks); equal scenes give equal bytes.
std::string serialize_scene(const Scene& scene);

}  // namespace groundlab::scenegen
