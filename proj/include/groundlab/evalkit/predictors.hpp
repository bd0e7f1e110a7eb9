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

#include <atomic>
#include <cstdint>

#include "groundlab/decoder/decoder.hpp"
#include "groundlab/detector/detector.hpp"
#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/evalkit/evaluate.hpp"

namespace groundlab::evalkit {

/// Returns the ground truth.
Predictor oracle_predictor();
/// Returns an all-background mask.
Predictor empty_predictor();

/// Decoder prediction. The referenced weights must outlive the predictor.
Predictor decoder_predictor(const dualenc::EncoderWeights& encoder, const decoder::Decoder& decoder);

/// Per-sample detector stream: derive_seed(seed, sample_id).
Rng detector_rng(std::uint64_t seed, int sample_id);

/// Top-ranked detector candidate, or an empty mask when there is none. Scenes
/// are looked up by the sample's scene id in `data`.
Predictor detector_predictor(const scenegen::DatasetSplit& data, const detector::DetectorConfig& config,
                             std::uint64_t seed);

struct HybridStats {
  std::atomic<int> fallbacks{0};
};

/// Detector candidates re-ranked by overlap with the decoder mask. Uses the same
/// candidate stream as detector_predictor for equal seeds.
Predictor hybrid_predictor(const scenegen::DatasetSplit& data, const dualenc::EncoderWeights& encoder,
                           const decoder::Decoder& decoder, const detector::DetectorConfig& config,
                           std::uint64_t seed, HybridStats* stats = nullptr);

}  // namespace groundlab::evalkit
