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

#include "groundlab/scenegen/attributes.hpp"

namespace groundlab::scenegen {

/// Smallest attribute set that identifies the target uniquely. Equal-size ties
/// go to field priority color > size > shape > position, then position string.
/// Throws indistinguishable when no set of at most four attributes works.
AttributeSet compute_mrq(const Scene& scene, int target_id, const Catalog& catalog);

}  // namespace groundlab::scenegen
