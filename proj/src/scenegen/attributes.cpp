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

#include "groundlab/scenegen/attributes.hpp"

#include <algorithm>

#include "groundlab/core/error.hpp"

namespace groundlab::scenegen {

namespace {

struct KindName {
  PositionKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {PositionKind::left, "left"},         {PositionKind::right, "right"},
    {PositionKind::top, "top"},           {PositionKind::bottom, "bottom"},
    {PositionKind::center, "center"},     {PositionKind::left_of, "left-of"},
    {PositionKind::right_of, "right-of"}, {PositionKind::above, "above"},
    {PositionKind::below, "below"},
};

std::string_view kind_name(PositionKind k) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "?";
}

// The single object of the anchor category, or null when absent or repeated.
const SceneObject* unique_anchor(const Scene& scene, const std::string& category) {
  const SceneObject* found = nullptr;
  for (const auto& o : scene.objects) {
    if (o.category.name != category) continue;
    if (found != nullptr) return nullptr;
    found = &o;
  }
  return found;
}

}  // namespace

bool Position::relational() const {
  return kind == PositionKind::left_of || kind == PositionKind::right_of ||
         kind == PositionKind::above || kind == PositionKind::below;
}

std::string Position::str() const {
  std::string s(kind_name(kind));
  if (relational()) s += ":" + anchor;
  return s;
}

Position Position::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  for (const auto& kn : kKindNames) {
    if (kn.name != head) continue;
    Position p{kn.kind, {}};
    if (p.relational()) {
      if (colon == std::string_view::npos || colon + 1 >= text.size()) {
        throw Error(Errc::unknown_attribute, "relational position needs an anchor: " + std::string(text));
      }
      p.anchor = std::string(text.substr(colon + 1));
    } else if (colon != std::string_view::npos) {
      throw Error(Errc::unknown_attribute, "absolute position takes no anchor: " + std::string(text));
    }
    return p;
  }
  throw Error(Errc::unknown_attribute, "unknown position " + std::string(text));
}

int AttributeSet::count() const {
  return 1 + (color ? 1 : 0) + (shape ? 1 : 0) + (size ? 1 : 0) + (position ? 1 : 0);
}

bool satisfies(const Scene& scene, const SceneObject& o, const Position& p) {
  const double w3 = scene.width / 3.0, h3 = scene.height / 3.0;
  const double x = o.center.x, y = o.center.y;
  switch (p.kind) {
    case PositionKind::left: return x < w3;
    case PositionKind::right: return x >= 2.0 * w3;
    case PositionKind::top: return y < h3;
    case PositionKind::bottom: return y >= 2.0 * h3;
    case PositionKind::center: return x >= w3 && x < 2.0 * w3 && y >= h3 && y < 2.0 * h3;
    default: break;
  }
  const SceneObject* a = unique_anchor(scene, p.anchor);
  if (a == nullptr || a->id == o.id) return false;
  switch (p.kind) {
    case PositionKind::left_of: return x + kRelationMargin <= a->center.x;
    case PositionKind::right_of: return x - kRelationMargin >= a->center.x;
    case PositionKind::above: return y + kRelationMargin <= a->center.y;
    case PositionKind::below: return y - kRelationMargin >= a->center.y;
    default: return false;
  }
}

std::vector<Position> positions_of(const Scene& scene, const SceneObject& object) {
  std::vector<Position> out;
  for (auto k : {PositionKind::left, PositionKind::right, PositionKind::top, PositionKind::bottom,
                 PositionKind::center}) {
    Position p{k, {}};
    if (satisfies(scene, object, p)) out.push_back(p);
  }
  std::vector<std::string> anchors;
  for (const auto& o : scene.objects) {
    if (o.id != object.id && o.category.name != object.category.name &&
        unique_anchor(scene, o.category.name) != nullptr) {
      anchors.push_back(o.category.name);
    }
  }
  for (const auto& anchor : anchors) {
    for (auto k : {PositionKind::left_of, PositionKind::right_of, PositionKind::above, PositionKind::below}) {
      Position p{k, anchor};
      if (satisfies(scene, object, p)) out.push_back(p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<int> match_objects(const Scene& scene, const AttributeSet& attrs, const Catalog& catalog) {
  if (!catalog.contains(attrs.object)) {
    throw Error(Errc::unknown_attribute, "unknown category " + attrs.object);
  }
  if (attrs.position && attrs.position->relational() && !catalog.contains(attrs.position->anchor)) {
    throw Error(Errc::unknown_attribute, "unknown anchor category " + attrs.position->anchor);
  }
  std::set<int> ids;
  for (const auto& o : scene.objects) {
    if (o.category.name != attrs.object) continue;
    if (attrs.color && o.color != *attrs.color) continue;
    if (attrs.shape && o.shape != *attrs.shape) continue;
    if (attrs.size && o.size != *attrs.size) continue;
    if (attrs.position && !satisfies(scene, o, *attrs.position)) continue;
    ids.insert(o.id);
  }
  return ids;
}

nlohmann::json to_json(const AttributeSet& a) {
  nlohmann::json j;
  j["object"] = a.object;
  j["color"] = a.color ? nlohmann::json(std::string(to_string(*a.color))) : nlohmann::json(nullptr);
  j["shape"] = a.shape ? nlohmann::json(std::string(to_string(*a.shape))) : nlohmann::json(nullptr);
  j["size"] = a.size ? nlohmann::json(std::string(to_string(*a.size))) : nlohmann::json(nullptr);
  j["position"] = a.position ? nlohmann::json(a.position->str()) : nlohmann::json(nullptr);
  return j;
}

AttributeSet attributes_from_json(const nlohmann::json& j) {
  AttributeSet a;
  a.object = j.at("object").get<std::string>();
  const auto field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  if (auto v = field("color")) {
    a.color = parse_color(*v);
    if (!a.color) throw Error(Errc::unknown_attribute, "unknown color " + *v);
  }
  if (auto v = field("shape")) {
    a.shape = parse_shape(*v);
    if (!a.shape) throw Error(Errc::unknown_attribute, "unknown shape " + *v);
  }
  if (auto v = field("size")) {
    a.size = parse_size(*v);
    if (!a.size) throw Error(Errc::unknown_attribute, "unknown size " + *v);
  }
  if (auto v = field("position")) a.position = Position::parse(*v);
  return a;
}

}  // namespace groundlab::scenegen
