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

#include "groundlab/evalkit/attributes.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "groundlab/core/error.hpp"

namespace groundlab::evalkit {

namespace {

using scenegen::Position;
using scenegen::PositionKind;

struct Pattern {
  std::vector<std::string> words;
  Position position;
};

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-') {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Pattern> position_patterns(const scenegen::Catalog& catalog) {
  std::vector<Pattern> p;
  const auto abs = [&](std::vector<std::string> w, PositionKind k) { p.push_back({std::move(w), {k, ""}}); };
  abs({"on", "the", "left", "side"}, PositionKind::left);
  abs({"on", "the", "left"}, PositionKind::left);
  abs({"on", "the", "right", "side"}, PositionKind::right);
  abs({"on", "the", "right"}, PositionKind::right);
  abs({"at", "the", "top"}, PositionKind::top);
  abs({"near", "the", "top"}, PositionKind::top);
  abs({"at", "the", "bottom"}, PositionKind::bottom);
  abs({"near", "the", "bottom"}, PositionKind::bottom);
  abs({"in", "the", "center"}, PositionKind::center);
  abs({"in", "the", "middle"}, PositionKind::center);
  for (const auto& c : catalog.categories()) {
    const std::string& a = c.name;
    p.push_back({{"to", "the", "left", "of", "the", a}, {PositionKind::left_of, a}});
    p.push_back({{"left", "of", "the", a}, {PositionKind::left_of, a}});
    p.push_back({{"to", "the", "right", "of", "the", a}, {PositionKind::right_of, a}});
    p.push_back({{"right", "of", "the", a}, {PositionKind::right_of, a}});
    p.push_back({{"above", "the", a}, {PositionKind::above, a}});
    p.push_back({{"below", "the", a}, {PositionKind::below, a}});
  }
  return p;
}

bool matches_at(const std::vector<std::string>& words, std::size_t at, const std::vector<std::string>& pattern) {
  if (at + pattern.size() > words.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (words[at + i] != pattern[i]) return false;
  }
  return true;
}

std::optional<scenegen::ShapeDescriptor> shape_from_word(std::string_view w) {
  for (auto s : scenegen::kAllShapes) {
    if (scenegen::shape_word(s) == w) return s;
  }
  return std::nullopt;
}

}  // namespace

scenegen::AttributeSet extract_attributes(std::string_view query_text, const scenegen::Catalog& catalog) {
  const auto words = split_words(query_text);
  const auto patterns = position_patterns(catalog);
  std::vector<bool> used(words.size(), false);
  scenegen::AttributeSet attrs;

  // Longest position phrase at the earliest start wins.
  for (std::size_t i = 0; i < words.size() && !attrs.position; ++i) {
    const Pattern* best = nullptr;
    for (const auto& p : patterns) {
      if (matches_at(words, i, p.words) && (!best || p.words.size() > best->words.size())) best = &p;
    }
    if (best) {
      attrs.position = best->position;
      for (std::size_t k = 0; k < best->words.size(); ++k) used[i + k] = true;
    }
  }

  for (std::size_t i = 0; i < words.size(); ++i) {
    if (used[i]) continue;
    const auto& w = words[i];
    if (attrs.object.empty() && catalog.contains(w)) {
      attrs.object = w;
    } else if (auto c = scenegen::parse_color(w); c && !attrs.color) {
      attrs.color = c;
    } else if (auto s = shape_from_word(w); s && !attrs.shape) {
      attrs.shape = s;
    } else if (auto z = scenegen::parse_size(w); z && !attrs.size) {
      attrs.size = z;
    }
  }
  if (attrs.object.empty()) {
    throw Error(Errc::no_head_noun, "no object word in \"" + std::string(query_text) + "\"");
  }
  return attrs;
}

}  // namespace groundlab::evalkit
