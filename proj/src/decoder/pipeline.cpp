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

#include "groundlab/decoder/pipeline.hpp"

#include <cmath>

#include "groundlab/core/error.hpp"
#include "groundlab/nn/checkpoint.hpp"

namespace groundlab::decoder {

namespace {
constexpr const char* kKind = "decoder";
}

DecoderConfig config_for(const dualenc::EncoderConfig& encoder, int width, FusionVariant variant) {
  DecoderConfig c;
  c.taps = encoder.taps;
  c.encoder_width = encoder.d_model;
  c.embed_dim = encoder.d_embed;
  c.width = width;
  c.grid = encoder.grid();
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(encoder.patch_size))));
  c.upsample = r * r == encoder.patch_size && r > 1 ? std::vector<int>{r, r} : std::vector<int>{encoder.patch_size};
  c.variant = variant;
  c.n_heads = width % 2 == 0 && (width / c.attn_divisor) % 2 == 0 ? 2 : 1;
  return c;
}

PredictionMask predict_mask(const Image& image, std::string_view query, const dualenc::EncoderWeights& encoder,
                            const dualenc::Tokenizer& tokenizer, const Decoder& decoder) {
  const RowVec q = dualenc::encode_text(encoder, tokenizer, query);
  const auto enc = dualenc::encode_image(encoder, image, decoder.config.taps);
  return decode(decoder, enc.projections.features, q);
}

void save_decoder(const std::filesystem::path& path, const Decoder& decoder, const std::string& encoder_fingerprint,
                  const nlohmann::json& extra) {
  const nlohmann::json meta{{"config", decoder.config.to_json()},
                            {"encoder_fingerprint", encoder_fingerprint},
                            {"fingerprint", decoder.fingerprint()},
                            {"extra", extra}};
  nn::write_checkpoint(path, kKind, meta, nn::params_of(decoder));
}

LoadedDecoder load_decoder(const std::filesystem::path& path, const std::string& encoder_fingerprint) {
  const auto header = nn::read_checkpoint_header(path);
  const std::string bound = header.meta.at("encoder_fingerprint").get<std::string>();
  if (bound != encoder_fingerprint) {
    throw Error(Errc::fingerprint_mismatch, path.string() + " was trained against encoder " + bound.substr(0, 12) +
                                                ", given " + encoder_fingerprint.substr(0, 12));
  }
  LoadedDecoder out;
  out.decoder = build_variant(DecoderConfig::from_json(header.meta.at("config")), 0);
  nn::read_checkpoint(path, kKind, nn::params_of(out.decoder));
  if (out.decoder.fingerprint() != header.meta.at("fingerprint").get<std::string>()) {
    throw Error(Errc::checksum_mismatch, path.string() + ": tensors do not match the stored fingerprint");
  }
  out.encoder_fingerprint = bound;
  out.extra = header.meta.at("extra");
  return out;
}

}  // namespace groundlab::decoder
