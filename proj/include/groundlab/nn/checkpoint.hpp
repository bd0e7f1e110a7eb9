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

#include <nlohmann/json.hpp>

#include "groundlab/nn/params.hpp"

namespace groundlab::nn {

inline constexpr int kCheckpointVersion = 1;

/// Container layout: "GLCK", u32 version, u64 header length, JSON header, then
/// every tensor as little-endian doubles in header order. The header holds the
/// caller's metadata under "meta" and the tensor table under "tensors".
void write_checkpoint(const std::filesystem::path& path, const std::string& kind,
                      const nlohmann::json& meta, const ParamList& params);

struct CheckpointHeader {
  std::string kind;
  nlohmann::json meta;
};

/// Reads metadata only.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Fills `params` (which fixes names and shapes) from the file. Throws
/// version-mismatch, shape-mismatch, or io-error for a kind it does not expect.
CheckpointHeader read_checkpoint(const std::filesystem::path& path, const std::string& kind,
                                 const ParamList& params);

}  // namespace groundlab::nn
