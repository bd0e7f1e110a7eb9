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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace groundlab::scenegen {

enum class Color : std::uint8_t { red, green, blue, yellow, orange, purple, white, black };
enum class ShapeDescriptor : std::uint8_t { round, square, triangular, elongated, star };
enum class SizeClass : std::uint8_t { small, large };
enum class Lighting : std::uint8_t { dark, dim, bright };

inline constexpr std::array kAllColors = {Color::red,    Color::green,  Color::blue,  Color::yellow,
                                          Color::orange, Color::purple, Color::white, Color::black};
inline constexpr std::array kAllShapes = {ShapeDescriptor::round, ShapeDescriptor::square,
                                          ShapeDescriptor::triangular, ShapeDescriptor::elongated,
                                          ShapeDescriptor::star};
inline constexpr std::array kAllSizes = {SizeClass::small, SizeClass::large};
inline constexpr std::array kAllLighting = {Lighting::dark, Lighting::dim, Lighting::bright};

std::string_view to_string(Color c);
std::string_view to_string(ShapeDescriptor s);
std::string_view to_string(SizeClass s);
std::string_view to_string(Lighting l);

std::optional<Color> parse_color(std::string_view s);
std::optional<ShapeDescriptor> parse_shape(std::string_view s);
std::optional<SizeClass> parse_size(std::string_view s);
std::optional<Lighting> parse_lighting(std::string_view s);

/// Surface word used in query text ("star-shaped" for star).
std::string_view shape_word(ShapeDescriptor s);

std::array<std::uint8_t, 3> color_rgb(Color c);
double lighting_gain(Lighting l);

struct ObjectCategory {
  std::string name;
  int glyph = 0;  // surface pattern id, see render.cpp
  bool seen = true;

  friend bool operator==(const ObjectCategory&, const ObjectCategory&) = default;
};

class Catalog {
 public:
  Catalog() = default;
  /// Throws invalid-argument unless names are unique and the seen/unseen
  /// partition has at least 10 categories with at least 3 unseen.
  explicit Catalog(std::vector<ObjectCategory> categories);

  /// Twelve categories; container, sprayer, wrench and multimeter are held out.
  static Catalog standard();

  const std::vector<ObjectCategory>& categories() const { return categories_; }
  const ObjectCategory* find(std::string_view name) const;
  std::vector<std::string> names(bool seen) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  std::vector<ObjectCategory> categories_;
};

}  // namespace groundlab::scenegen
