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
#include <string_view>

#include "groundlab/decoder/decoder.hpp"
#include "groundlab/dualenc/encoder.hpp"

namespace groundlab::decoder {

/// Decoder config matching an encoder: taps, widths and patch grid. Upsampling
/// is two equal stages when the patch side is a perfect square, else one.
DecoderConfig config_for(const dualenc::EncoderConfig& encoder, int width, FusionVariant variant);

/// encode_text → encode_image → decode → mask head.
PredictionMask predict_mask(const Image& image, std::string_view query, const dualenc::EncoderWeights& encoder,
                            const dualenc::Tokenizer& tokenizer, const Decoder& decoder);

/// Decoder tensors plus its config, bound to the encoder fingerprint it was trained against.
void save_decoder(const std::filesystem::path& path, const Decoder& decoder, const std::string& encoder_fingerprint,
                  const nlohmann::json& extra = nlohmann::json::object());

struct LoadedDecoder {
  Decoder decoder;
  std::string encoder_fingerprint;
  nlohmann::json extra;
};

/// Throws fingerprint-mismatch unless the stored binding equals `encoder_fingerprint`.
LoadedDecoder load_decoder(const std::filesystem::path& path, const std::string& encoder_fingerprint);

}  // namespace groundlab::decoder
