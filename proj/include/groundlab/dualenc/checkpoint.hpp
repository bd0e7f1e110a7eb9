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

#include "groundlab/dualenc/encoder.hpp"

namespace groundlab::dualenc {

/// Config snapshot, tensors, frozen flag, fingerprint and pretraining metrics.
void save_encoder(const std::filesystem::path& path, const EncoderWeights& weights);

/// Throws checksum-mismatch when the stored fingerprint disagrees with the tensors.
EncoderWeights load_encoder(const std::filesystem::path& path);

}  // namespace groundlab::dualenc
