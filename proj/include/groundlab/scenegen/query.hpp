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

#include <string>
#include <vector>

#include "groundlab/core/random.hpp"
#include "groundlab/scenegen/attributes.hpp"

namespace groundlab::scenegen {

/// Number of sentence templates available at every attribute count.
inline constexpr int kTemplateCount = 12;

struct ReferringQuery {
  std::string text;
  AttributeSet attributes;
  int target_id = 0;
  int template_id = 0;

  friend bool operator==(const ReferringQuery&, const ReferringQuery&) = default;
};

/// Deterministic text for (template, attributes).
std::string render_query_text(const AttributeSet& attrs, int template_id);

/// Builds a query with exactly n_attributes attributes that matches only the
/// target. Throws ambiguous-target when no such combination exists.
ReferringQuery generate_query(const Scene& scene, int target_id, int n_attributes, Rng& rng,
                              const Catalog& catalog);

/// All attribute sets of the given count (object always included) that the target
/// satisfies, in canonical order. Uniqueness is not checked.
std::vector<AttributeSet> attribute_combinations(const Scene& scene, const SceneObject& target,
                                                 int n_attributes);

/// Every word the grammar can emit, sorted.
std::vector<std::string> grammar_vocabulary(const Catalog& catalog);

/// Short scene description used as a pretraining caption.
std::string describe_object(const Scene& scene, const SceneObject& object, int style, Rng& rng);

}  // namespace groundlab::scenegen
