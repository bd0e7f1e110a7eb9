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

#include "groundlab/scenegen/query.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "groundlab/core/error.hpp"

namespace groundlab::scenegen {

namespace {

constexpr std::array<std::string_view, kTemplateCount> kPrefixes = {
    "grab the",  "give me the", "pick up the", "please grab the", "where is the", "find the",
    "hand me the", "point to the", "bring me the", "fetch the", "select the", "i want the",
};

std::vector<std::string> position_variants(const Position& p) {
  switch (p.kind) {
    case PositionKind::left: return {"on the left", "on the left side"};
    case PositionKind::right: return {"on the right", "on the right side"};
    case PositionKind::top: return {"at the top", "near the top"};
    case PositionKind::bottom: return {"at the bottom", "near the bottom"};
    case PositionKind::center: return {"in the center", "in the middle"};
    case PositionKind::left_of: return {"to the left of the " + p.anchor, "left of the " + p.anchor};
    case PositionKind::right_of: return {"to the right of the " + p.anchor, "right of the " + p.anchor};
    case PositionKind::above: return {"above the " + p.anchor};
    case PositionKind::below: return {"below the " + p.anchor};
  }
  return {};
}

std::string noun_phrase(const AttributeSet& a) {
  std::string s;
  if (a.size) s += std::string(to_string(*a.size)) + " ";
  if (a.color) s += std::string(to_string(*a.color)) + " ";
  if (a.shape) s += std::string(shape_word(*a.shape)) + " ";
  return s + a.object;
}

std::string position_phrase(const Position& p, int variant) {
  const auto v = position_variants(p);
  return v[static_cast<std::size_t>(variant) % v.size()];
}

enum Field { kColor, kSize, kShape, kPosition };

}  // namespace

std::string render_query_text(const AttributeSet& attrs, int template_id) {
  if (template_id < 0 || template_id >= kTemplateCount) {
    throw Error(Errc::invalid_argument, "template id out of range");
  }
  std::string text = std::string(kPrefixes[template_id]) + " " + noun_phrase(attrs);
  if (attrs.position) text += " " + position_phrase(*attrs.position, template_id / 2);
  return text;
}

std::vector<AttributeSet> attribute_combinations(const Scene& scene, const SceneObject& target,
                                                 int n_attributes) {
  std::vector<AttributeSet> out;
  const int extra = n_attributes - 1;
  if (extra < 0 || extra > 3) return out;
  const auto positions = positions_of(scene, target);
  // Field subsets of size `extra` in lexicographic order of field priority.
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur;
  const auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == extra) {
      subsets.push_back(cur);
      return;
    }
    for (int f = start; f < 4; ++f) {
      cur.push_back(f);
      self(self, f + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  for (const auto& subset : subsets) {
    AttributeSet base;
    base.object = target.category.name;
    bool wants_position = false;
    for (int f : subset) {
      switch (f) {
        case kColor: base.color = target.color; break;
        case kSize: base.size = target.size; break;
        case kShape: base.shape = target.shape; break;
        case kPosition: wants_position = true; break;
      }
    }
    if (!wants_position) {
      out.push_back(base);
      continue;
    }
    for (const auto& p : positions) {
      AttributeSet a = base;
      a.position = p;
      out.push_back(std::move(a));
    }
  }
  return out;
}

ReferringQuery generate_query(const Scene& scene, int target_id, int n_attributes, Rng& rng,
                              const Catalog& catalog) {
  const SceneObject* target = scene.object(target_id);
  if (target == nullptr) throw Error(Errc::invalid_argument, "no object " + std::to_string(target_id));
  if (n_attributes < 1 || n_attributes > 4) {
    throw Error(Errc::invalid_argument, "n_attributes must be in 1..4");
  }
  std::vector<AttributeSet> unique;
  for (auto& a : attribute_combinations(scene, *target, n_attributes)) {
    const auto ids = match_objects(scene, a, catalog);
    if (ids.size() == 1 && *ids.begin() == target_id) unique.push_back(std::move(a));
  }
  if (unique.empty()) {
    throw Error(Errc::ambiguous_target, "no " + std::to_string(n_attributes) +
                                            "-attribute query isolates object " + std::to_string(target_id));
  }
  ReferringQuery q;
  q.attributes = unique[rng.below(unique.size())];
  q.template_id = static_cast<int>(rng.below(kTemplateCount));
  q.target_id = target_id;
  q.text = render_query_text(q.attributes, q.template_id);
  return q;
}

std::vector<std::string> grammar_vocabulary(const Catalog& catalog) {
  std::set<std::string> words;
  const auto add_words = [&](std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) words.insert(w);
  };
  for (auto p : kPrefixes) add_words(p);
  for (auto c : kAllColors) add_words(to_string(c));
  for (auto s : kAllShapes) add_words(shape_word(s));
  for (auto s : kAllSizes) add_words(to_string(s));
  for (const auto& c : catalog.categories()) {
    add_words(c.name);
    for (auto k : {PositionKind::left, PositionKind::right, PositionKind::top, PositionKind::bottom,
                   PositionKind::center, PositionKind::left_of, PositionKind::right_of,
                   PositionKind::above, PositionKind::below}) {
      for (const auto& v : position_variants(Position{k, c.name})) add_words(v);
    }
  }
  add_words("a and");
  return {words.begin(), words.end()};
}

std::string describe_object(const Scene& scene, const SceneObject& object, int style, Rng& rng) {
  AttributeSet a;
  a.object = object.category.name;
  switch (style % 3) {
    case 0: {
      a.color = object.color;
      a.size = object.size;
      a.shape = object.shape;
      const auto positions = positions_of(scene, object);
      std::vector<Position> absolute;
      for (const auto& p : positions) {
        if (!p.relational()) absolute.push_back(p);
      }
      if (!absolute.empty()) a.position = absolute[rng.below(absolute.size())];
      return render_query_text(a, static_cast<int>(rng.below(kTemplateCount)));
    }
    case 1:
      return "a " + std::string(to_string(object.size)) + " " + std::string(to_string(object.color)) +
             " " + std::string(shape_word(object.shape)) + " " + object.category.name;
    default: {
      std::string s = "a " + std::string(to_string(object.color)) + " " + object.category.name;
      for (const auto& p : positions_of(scene, object)) {
        if (!p.relational()) return s + " " + position_phrase(p, static_cast<int>(rng.below(2)));
      }
      return s;
    }
  }
}

}  // namespace groundlab::scenegen
