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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/scenegen/catalog.hpp"
#include "groundlab/scenegen/scene.hpp"

namespace groundlab::scenegen {

enum class PositionKind { left, right, top, bottom, center, left_of, right_of, above, below };

/// Absolute positions use image thirds. Relational ones compare centres with a
/// uniquely present anchor category.
struct Position {
  PositionKind kind = PositionKind::left;
  std::string anchor;  // category name, relational kinds only

  bool relational() const;
  /// "left", "center", "left-of:cup", ...
  std::string str() const;
  /// Throws unknown-attribute on malformed input.
  static Position parse(std::string_view text);

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position& a, const Position& b) { return a.str() <=> b.str(); }
};

/// Minimum centre separation for a relational position to hold, in pixels.
inline constexpr double kRelationMargin = 6.0;

struct AttributeSet {
  std::string object;
  std::optional<Color> color;
  std::optional<ShapeDescriptor> shape;
  std::optional<SizeClass> size;
  std::optional<Position> position;

  /// Populated fields, object included.
  int count() const;

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

/// Whether `object` satisfies `position` within `scene`.
bool satisfies(const Scene& scene, const SceneObject& object, const Position& position);

/// Every position value that holds for the object, sorted by string form.
std::vector<Position> positions_of(const Scene& scene, const SceneObject& object);

/// Ids of the objects satisfying every populated attribute. Throws
/// unknown-attribute when the category (or a relational anchor) is not in the catalog.
std::set<int> match_objects(const Scene& scene, const AttributeSet& attrs, const Catalog& catalog);

/// {"object": "apple", "color": "red", "shape": null, "size": null, "position": "left"}.
nlohmann::json to_json(const AttributeSet& attrs);
/// Throws unknown-attribute on unrecognised color, shape, size or position names.
AttributeSet attributes_from_json(const nlohmann::json& j);

}  // namespace groundlab::scenegen
