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

#include "groundlab/scenegen/mrq.hpp"

#include "groundlab/core/error.hpp"
#include "groundlab/scenegen/query.hpp"

namespace groundlab::scenegen {

AttributeSet compute_mrq(const Scene& scene, int target_id, const Catalog& catalog) {
  const SceneObject* target = scene.object(target_id);
  if (target == nullptr) throw Error(Errc::invalid_argument, "no object " + std::to_string(target_id));
  for (int n = 1; n <= 4; ++n) {
    // attribute_combinations enumerates in tie-break order already.
    for (const auto& a : attribute_combinations(scene, *target, n)) {
      const auto ids = match_objects(scene, a, catalog);
      if (ids.size() == 1 && *ids.begin() == target_id) return a;
    }
  }
  throw Error(Errc::indistinguishable,
              "object " + std::to_string(target_id) + " has an identical twin in scene " +
                  std::to_string(scene.id));
}

}  // namespace groundlab::scenegen
