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

#include "groundlab/scenegen/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "groundlab/core/random.hpp"

namespace groundlab::scenegen {

namespace {

constexpr std::array<std::uint8_t, 3> kBackground{150, 130, 105};
constexpr int kNoiseAmplitude = 6;

bool inside_polygon(const double* xs, const double* ys, int n, double x, double y) {
  bool in = false;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    if ((ys[i] > y) != (ys[j] > y) &&
        x < (xs[j] - xs[i]) * (y - ys[i]) / (ys[j] - ys[i]) + xs[i]) {
      in = !in;
    }
  }
  return in;
}

// Local coordinates relative to the object centre.
bool covers_local(const SceneObject& o, double dx, double dy) {
  const double r = o.radius;
  switch (o.shape) {
    case ShapeDescriptor::round:
      return dx * dx + dy * dy <= r * r;
    case ShapeDescriptor::square:
      return std::abs(dx) <= 0.85 * r && std::abs(dy) <= 0.85 * r;
    case ShapeDescriptor::triangular: {
      const double xs[3] = {0.0, -r, r};
      const double ys[3] = {-r, 0.75 * r, 0.75 * r};
      return inside_polygon(xs, ys, 3, dx, dy);
    }
    case ShapeDescriptor::elongated: {
      const double a = o.vertical ? 0.5 * r : 1.35 * r;
      const double b = o.vertical ? 1.35 * r : 0.5 * r;
      return (dx * dx) / (a * a) + (dy * dy) / (b * b) <= 1.0;
    }
    case ShapeDescriptor::star: {
      double xs[10], ys[10];
      for (int k = 0; k < 10; ++k) {
        const double ang = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
        const double rad = (k % 2 == 0) ? 1.1 * r : 0.5 * r;
        xs[k] = rad * std::cos(ang);
        ys[k] = rad * std::sin(ang);
      }
      return inside_polygon(xs, ys, 10, dx, dy);
    }
  }
  return false;
}

// Category surface pattern; true where the pixel carries the glyph mark.
bool glyph_mark(int glyph, double dx, double dy, double r) {
  const auto fl = [](double v) { return static_cast<long>(std::floor(v)); };
  switch (glyph) {
    case 0: return false;
    case 1: return fl((dy + 64.0) / 3.0) % 2 == 0;
    case 2: return fl((dx + 64.0) / 3.0) % 2 == 0;
    case 3: return (fl((dx + 64.0) / 4.0) + fl((dy + 64.0) / 4.0)) % 2 == 0;
    case 4: return dx * dx + dy * dy <= 0.16 * r * r;
    case 5: {
      const double d = std::sqrt(dx * dx + dy * dy);
      return d >= 0.35 * r && d <= 0.6 * r;
    }
    case 6: return fl((dx + dy + 128.0) / 3.0) % 2 == 0;
    case 7: return std::abs(dx) <= 1.5 || std::abs(dy) <= 1.5;
    case 8: return fl((dx + 64.0)) % 5 < 2 && fl((dy + 64.0)) % 5 < 2;
    case 9: return fl((dx - dy + 128.0) / 3.0) % 2 == 0;
    case 10: return std::abs(dy) <= 0.22 * r;
    case 11: return std::abs(dx) <= 0.22 * r;
    default: return false;
  }
}

std::array<double, 3> marked_color(Color c, bool marked) {
  const auto rgb = color_rgb(c);
  std::array<double, 3> out{double(rgb[0]), double(rgb[1]), double(rgb[2])};
  if (!marked) return out;
  const bool dark = c == Color::black || c == Color::blue || c == Color::purple;
  for (auto& v : out) v = dark ? v + 0.5 * (255.0 - v) : 0.5 * v;
  return out;
}

}  // namespace

bool covers(const SceneObject& object, double px, double py) {
  return covers_local(object, px - object.center.x, py - object.center.y);
}

Mask footprint(const SceneObject& object, int height, int width) {
  Mask m(height, width);
  const int r = static_cast<int>(std::ceil(1.4 * object.radius)) + 1;
  const int y0 = std::max(0, static_cast<int>(object.center.y) - r);
  const int y1 = std::min(height - 1, static_cast<int>(object.center.y) + r);
  const int x0 = std::max(0, static_cast<int>(object.center.x) - r);
  const int x1 = std::min(width - 1, static_cast<int>(object.center.x) + r);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (covers(object, x + 0.5, y + 0.5)) m.at(y, x) = 1;
    }
  }
  return m;
}

std::vector<Mask> visible_masks(const std::vector<SceneObject>& objects, int height, int width) {
  // Owner of each pixel is the covering object with the highest z-order.
  std::vector<int> owner(static_cast<std::size_t>(height) * width, -1);
  std::vector<int> owner_z(owner.size(), 0);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Mask fp = footprint(objects[i], height, width);
    for (std::size_t p = 0; p < fp.bits.size(); ++p) {
      if (fp.bits[p] && (owner[p] < 0 || objects[i].z_order > owner_z[p])) {
        owner[p] = static_cast<int>(i);
        owner_z[p] = objects[i].z_order;
      }
    }
  }
  std::vector<Mask> masks(objects.size(), Mask(height, width));
  for (std::size_t p = 0; p < owner.size(); ++p) {
    if (owner[p] >= 0) masks[owner[p]].bits[p] = 1;
  }
  return masks;
}

Rendering render(const Scene& scene) {
  Rendering out;
  out.masks = visible_masks(scene.objects, scene.height, scene.width);
  out.image = Image(scene.height, scene.width);
  const double gain = lighting_gain(scene.lighting);
  Rng noise(derive_seed(scene.master_seed, 0x6e6f697365ull));
  std::vector<int> owner(static_cast<std::size_t>(scene.height) * scene.width, -1);
  for (std::size_t i = 0; i < out.masks.size(); ++i) {
    for (std::size_t p = 0; p < owner.size(); ++p) {
      if (out.masks[i].bits[p]) owner[p] = static_cast<int>(i);
    }
  }
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      const int o = owner[static_cast<std::size_t>(y) * scene.width + x];
      std::array<double, 3> base{double(kBackground[0]), double(kBackground[1]), double(kBackground[2])};
      if (o >= 0) {
        const auto& obj = scene.objects[o];
        const double dx = x + 0.5 - obj.center.x, dy = y + 0.5 - obj.center.y;
        base = marked_color(obj.color, glyph_mark(obj.category.glyph, dx, dy, obj.radius));
      }
      std::uint8_t* px = out.image.pixel(y, x);
      for (int c = 0; c < 3; ++c) {
        const int jitter = static_cast<int>(noise.below(2 * kNoiseAmplitude + 1)) - kNoiseAmplitude;
        const double v = std::round(base[c] * gain) + jitter;
        px[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace groundlab::scenegen
