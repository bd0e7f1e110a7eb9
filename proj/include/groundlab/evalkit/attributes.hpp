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

#include <string_view>

#include "groundlab/scenegen/attributes.hpp"
#include "groundlab/scenegen/catalog.hpp"

namespace groundlab::evalkit {

/// Lexicon tagger for object, color, shape, size and position phrases. Exact on
/// text produced by the query grammar. Throws no-head-noun when no category
/// word is found outside a position phrase.
scenegen::AttributeSet extract_attributes(std::string_view query_text, const scenegen::Catalog& catalog);

}  // namespace groundlab::evalkit
