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

#include "groundlab/scenegen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "groundlab/core/error.hpp"
#include "groundlab/core/random.hpp"
#include "groundlab/scenegen/dataset_io.hpp"
#include "groundlab/scenegen/render.hpp"

namespace groundlab::scenegen {

const SceneObject* Scene::object(int object_id) const {
  for (const auto& o : objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

namespace {

double extent(const SceneObject& o) {
  switch (o.shape) {
    case ShapeDescriptor::elongated: return 1.35 * o.radius;
    case ShapeDescriptor::star: return 1.1 * o.radius;
    default: return o.radius;
  }
}

struct Box {
  int y0, y1, x0, x1;
};

Box bounds(const SceneObject& o, int h, int w) {
  const double e = extent(o) + 1.0;
  return {std::max(0, static_cast<int>(std::floor(o.center.y - e))),
          std::min(h - 1, static_cast<int>(std::ceil(o.center.y + e))),
          std::max(0, static_cast<int>(std::floor(o.center.x - e))),
          std::min(w - 1, static_cast<int>(std::ceil(o.center.x + e)))};
}

template <typename T>
T pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

}  // namespace

Scene generate_scene(const SceneConfig& config, std::uint64_t seed, const Catalog& catalog,
                     int scene_id) {
  if (config.clutter_level < 1 || config.clutter_level > 3) {
    throw Error(Errc::invalid_argument, "clutter_level must be 1, 2 or 3");
  }
  if (config.categories.empty() && !config.allow_empty) {
    throw Error(Errc::invalid_argument, "scene needs at least one category");
  }
  if (config.palette.empty()) throw Error(Errc::invalid_argument, "empty palette");

  Rng rng(seed);
  Scene scene;
  scene.id = scene_id;
  scene.height = config.height;
  scene.width = config.width;
  scene.clutter_level = config.clutter_level;
  scene.master_seed = seed;
  scene.lighting = config.lighting ? *config.lighting : kAllLighting[rng.below(kAllLighting.size())];

  const std::vector<ShapeDescriptor> shapes(kAllShapes.begin(), kAllShapes.end());
  const int n = static_cast<int>(config.categories.size()) * config.clutter_level;
  const double crowd = std::min(1.0, std::sqrt(9.0 / std::max(n, 1)));

  for (const auto& name : config.categories) {
    const ObjectCategory* category = catalog.find(name);
    if (category == nullptr) throw Error(Errc::unknown_attribute, "unknown category " + name);
    for (int j = 0; j < config.clutter_level; ++j) {
      SceneObject o;
      o.id = static_cast<int>(scene.objects.size());
      o.category = *category;
      const SceneObject* first = j > 0 ? &scene.objects[scene.objects.size() - j] : nullptr;
      const auto share = [&] { return first != nullptr && rng.bernoulli(config.attribute_share); };
      o.color = share() ? first->color : pick(rng, config.palette);
      o.shape = share() ? first->shape : pick(rng, shapes);
      o.size = share() ? first->size : (rng.bernoulli(0.5) ? SizeClass::large : SizeClass::small);
      o.vertical = rng.bernoulli(0.5);
      o.radius = crowd * (o.size == SizeClass::small
                              ? rng.uniform(config.small_radius_min, config.small_radius_max)
                              : rng.uniform(config.large_radius_min, config.large_radius_max));
      scene.objects.push_back(std::move(o));
    }
  }

  std::vector<int> z(scene.objects.size());
  std::iota(z.begin(), z.end(), 0);
  rng.shuffle(std::span<int>(z));
  for (std::size_t i = 0; i < z.size(); ++i) scene.objects[i].z_order = z[i];

  const int h = config.height, w = config.width;
  std::vector<Mask> fps;
  std::vector<Mask> visible;
  std::vector<std::size_t> fp_area;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    SceneObject& o = scene.objects[k];
    const double e = extent(o) + 1.0;
    if (2 * e >= std::min(h, w)) throw Error(Errc::placement_failed, "object larger than image");
    bool placed = false;
    for (int attempt = 0; attempt < config.max_retries && !placed; ++attempt) {
      o.center = {rng.uniform(e, w - e), rng.uniform(e, h - e)};
      Mask fp = footprint(o, h, w);
      const std::size_t area = fp.area();
      if (area == 0) continue;
      const Box b = bounds(o, h, w);
      bool ok = true;
      // Objects below the candidate lose the pixels it covers.
      for (std::size_t i = 0; i < k && ok; ++i) {
        if (scene.objects[i].z_order > o.z_order) continue;
        std::size_t lost = 0;
        for (int y = b.y0; y <= b.y1; ++y)
          for (int x = b.x0; x <= b.x1; ++x) lost += visible[i].at(y, x) & fp.at(y, x);
        const std::size_t remaining = visible[i].area() - lost;
        ok = remaining >= (1.0 - config.max_occlusion) * static_cast<double>(fp_area[i]) && remaining > 0;
      }
      if (!ok) continue;
      Mask vis = fp;
      for (std::size_t i = 0; i < k; ++i) {
        if (scene.objects[i].z_order < o.z_order) continue;
        for (int y = b.y0; y <= b.y1; ++y)
          for (int x = b.x0; x <= b.x1; ++x)
            if (fps[i].at(y, x)) vis.at(y, x) = 0;
      }
      const std::size_t vis_area = vis.area();
      if (vis_area == 0 || vis_area < (1.0 - config.max_occlusion) * static_cast<double>(area)) continue;
      for (std::size_t i = 0; i < k; ++i) {
        if (scene.objects[i].z_order > o.z_order) continue;
        for (int y = b.y0; y <= b.y1; ++y)
          for (int x = b.x0; x <= b.x1; ++x)
            if (fp.at(y, x)) visible[i].at(y, x) = 0;
      }
      fps.push_back(std::move(fp));
      visible.push_back(std::move(vis));
      fp_area.push_back(area);
      placed = true;
    }
    if (!placed) {
      throw Error(Errc::placement_failed, "object " + std::to_string(o.id) + " (" + o.category.name +
                                              ") could not be placed within the occlusion limit");
    }
  }
  for (std::size_t i = 0; i < scene.objects.size(); ++i) scene.objects[i].gt_mask = std::move(visible[i]);
  return scene;
}

std::string serialize_scene(const Scene& scene) {
  nlohmann::json j;
  j["id"] = scene.id;
  j["height"] = scene.height;
  j["width"] = scene.width;
  j["clutter_level"] = scene.clutter_level;
  j["lighting"] = std::string(to_string(scene.lighting));
  j["master_seed"] = scene.master_seed;
  std::vector<Mask> masks;
  for (const auto& o : scene.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"category", o.category.name},
                            {"color", std::string(to_string(o.color))},
                            {"shape", std::string(to_string(o.shape))},
                            {"size", std::string(to_string(o.size))},
                            {"cx", o.center.x},
                            {"cy", o.center.y},
                            {"radius", o.radius},
                            {"vertical", o.vertical},
                            {"z", o.z_order}});
    masks.push_back(o.gt_mask);
  }
  return j.dump() + "\n" + encode_rle(masks);
}

}  // namespace groundlab::scenegen
