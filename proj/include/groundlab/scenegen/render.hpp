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

#include <vector>

#include "groundlab/core/tensor.hpp"
#include "groundlab/scenegen/scene.hpp"

namespace groundlab::scenegen {

struct Rendering {
  Image image;
  std::vector<Mask> masks;  // visible mask per object, scene order
};

/// True when the pixel centre (px, py) lies inside the object's silhouette.
bool covers(const SceneObject& object, double px, double py);

/// Unoccluded silhouette of one object.
Mask footprint(const SceneObject& object, int height, int width);

/// Visible masks from silhouettes and z-order; pairwise disjoint.
std::vector<Mask> visible_masks(const std::vector<SceneObject>& objects, int height, int width);

/// Rasterises the scene. Pure in the scene fields (noise is seeded from master_seed).
Rendering render(const Scene& scene);

}  // namespace groundlab::scenegen
