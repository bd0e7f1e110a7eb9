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

#include <filesystem>
#include <string>
#include <vector>

#include "groundlab/scenegen/dataset.hpp"

namespace groundlab::scenegen {

inline constexpr int kDatasetFormatVersion = 1;

/// Text run-length encoding: header "RLE1 <height> <width> <count>", then one
/// line per mask of alternating run lengths starting with a background run.
std::string encode_rle(const std::vector<Mask>& masks);
std::vector<Mask> decode_rle(const std::string& text);

/// Binary PPM (P6).
std::string encode_ppm(const Image& image);
Image decode_ppm(const std::string& bytes);

/// Layout:
///   index.json      format, version, config, catalog, vocabulary, per-file sha256
///   scenes.jsonl    one scene record per line (object metadata)
///   queries.jsonl   one sample record per line
///   images/scene_<id>.ppm, masks/scene_<id>.rle, masks/sample_<id>.rle
void persist_dataset(const DatasetSplit& split, const std::filesystem::path& directory);

/// Throws missing-index, version-mismatch, missing-file or checksum-mismatch.
DatasetSplit load_dataset(const std::filesystem::path& directory);

}  // namespace groundlab::scenegen
