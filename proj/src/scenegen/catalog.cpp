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

#include "groundlab/scenegen/catalog.hpp"

#include <set>

#include "groundlab/core/error.hpp"

namespace groundlab::scenegen {

std::string_view to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::yellow: return "yellow";
    case Color::orange: return "orange";
    case Color::purple: return "purple";
    case Color::white: return "white";
    case Color::black: return "black";
  }
  return "?";
}

std::string_view to_string(ShapeDescriptor s) {
  switch (s) {
    case ShapeDescriptor::round: return "round";
    case ShapeDescriptor::square: return "square";
    case ShapeDescriptor::triangular: return "triangular";
    case ShapeDescriptor::elongated: return "elongated";
    case ShapeDescriptor::star: return "star";
  }
  return "?";
}

std::string_view to_string(SizeClass s) { return s == SizeClass::small ? "small" : "large"; }

std::string_view to_string(Lighting l) {
  switch (l) {
    case Lighting::dark: return "dark";
    case Lighting::dim: return "dim";
    case Lighting::bright: return "bright";
  }
  return "?";
}

std::string_view shape_word(ShapeDescriptor s) {
  return s == ShapeDescriptor::star ? "star-shaped" : to_string(s);
}

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Color> parse_color(std::string_view s) { return parse_enum(s, kAllColors); }
std::optional<ShapeDescriptor> parse_shape(std::string_view s) {
  if (s == "star-shaped") return ShapeDescriptor::star;
  return parse_enum(s, kAllShapes);
}
std::optional<SizeClass> parse_size(std::string_view s) { return parse_enum(s, kAllSizes); }
std::optional<Lighting> parse_lighting(std::string_view s) { return parse_enum(s, kAllLighting); }

std::array<std::uint8_t, 3> color_rgb(Color c) {
  switch (c) {
    case Color::red: return {220, 40, 40};
    case Color::green: return {40, 170, 60};
    case Color::blue: return {40, 80, 225};
    case Color::yellow: return {240, 215, 40};
    case Color::orange: return {245, 130, 20};
    case Color::purple: return {145, 55, 185};
    case Color::white: return {245, 245, 245};
    case Color::black: return {25, 25, 25};
  }
  return {0, 0, 0};
}

double lighting_gain(Lighting l) {
  switch (l) {
    case Lighting::dark: return 0.6;
    case Lighting::dim: return 0.8;
    case Lighting::bright: return 1.0;
  }
  return 1.0;
}

Catalog::Catalog(std::vector<ObjectCategory> categories) : categories_(std::move(categories)) {
  std::set<std::string> names;
  int unseen = 0;
  for (const auto& c : categories_) {
    if (!names.insert(c.name).second) {
      throw Error(Errc::invalid_argument, "duplicate category " + c.name);
    }
    unseen += c.seen ? 0 : 1;
  }
  if (categories_.size() < 10 || unseen < 3) {
    throw Error(Errc::invalid_argument, "catalog needs >= 10 categories with >= 3 unseen");
  }
}

Catalog Catalog::standard() {
  return Catalog({
      {"apple", 0, true},      {"banana", 1, true},     {"cup", 2, true},
      {"box", 3, true},        {"pen", 4, true},        {"ball", 5, true},
      {"can", 6, true},        {"bowl", 7, true},       {"container", 8, false},
      {"sprayer", 9, false},   {"wrench", 10, false},   {"multimeter", 11, false},
  });
}

const ObjectCategory* Catalog::find(std::string_view name) const {
  for (const auto& c : categories_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::string> Catalog::names(bool seen) const {
  std::vector<std::string> out;
  for (const auto& c : categories_) {
    if (c.seen == seen) out.push_back(c.name);
  }
  return out;
}

}  // namespace groundlab::scenegen
