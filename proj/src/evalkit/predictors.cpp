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

#include "groundlab/evalkit/predictors.hpp"

#include <memory>

#include "groundlab/decoder/pipeline.hpp"

namespace groundlab::evalkit {

namespace {

constexpr std::uint64_t kDetectorStream = 0x646574;

}  // namespace

Predictor oracle_predictor() {
  return [](const scenegen::LabeledSample& s) { return s.gt_mask; };
}

Predictor empty_predictor() {
  return [](const scenegen::LabeledSample& s) { return Mask(s.gt_mask.height, s.gt_mask.width); };
}

Predictor decoder_predictor(const dualenc::EncoderWeights& encoder, const decoder::Decoder& dec) {
  auto tok = std::make_shared<dualenc::Tokenizer>(encoder.config.vocabulary, encoder.config.max_text_len);
  return [&encoder, &dec, tok](const scenegen::LabeledSample& s) {
    return decoder::predict_mask(s.image, s.query.text, encoder, *tok, dec).binary;
  };
}

Rng detector_rng(std::uint64_t seed, int sample_id) {
  return Rng(derive_seed(seed, kDetectorStream, static_cast<std::uint64_t>(sample_id)));
}

Predictor detector_predictor(const scenegen::DatasetSplit& data, const detector::DetectorConfig& config,
                             std::uint64_t seed) {
  return [&data, config, seed](const scenegen::LabeledSample& s) {
    Rng rng = detector_rng(seed, s.sample_id);
    auto c = detector::detect_topk(data.scene(s.scene_id), s.query.text, config, rng, data.catalog);
    return c.empty() ? Mask(s.gt_mask.height, s.gt_mask.width) : c.front().mask;
  };
}

Predictor hybrid_predictor(const scenegen::DatasetSplit& data, const dualenc::EncoderWeights& encoder,
                           const decoder::Decoder& dec, const detector::DetectorConfig& config,
                           std::uint64_t seed, HybridStats* stats) {
  auto own = decoder_predictor(encoder, dec);
  return [&data, own, config, seed, stats](const scenegen::LabeledSample& s) {
    const Mask reference = own(s);
    Rng rng = detector_rng(seed, s.sample_id);
    const auto c = detector::detect_topk(data.scene(s.scene_id), s.query.text, config, rng, data.catalog);
    auto choice = detector::hybrid_select(reference, c);
    if (!choice.warning.empty() && stats) stats->fallbacks.fetch_add(1, std::memory_order_relaxed);
    return std::move(choice.mask);
  };
}

}  // namespace groundlab::evalkit
