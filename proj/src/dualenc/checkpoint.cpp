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

#include "groundlab/dualenc/checkpoint.hpp"

#include "groundlab/core/error.hpp"
#include "groundlab/nn/checkpoint.hpp"

namespace groundlab::dualenc {

namespace {
constexpr const char* kKind = "encoder";
}

void save_encoder(const std::filesystem::path& path, const EncoderWeights& weights) {
  const nlohmann::json meta{{"config", weights.config.to_json()},
                            {"frozen", weights.frozen},
                            {"fingerprint", weights.compute_fingerprint()},
                            {"metrics", weights.metrics.to_json()}};
  nn::write_checkpoint(path, kKind, meta, nn::params_of(weights));
}

EncoderWeights load_encoder(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  EncoderWeights w = EncoderWeights::init(EncoderConfig::from_json(header.meta.at("config")), 0);
  nn::read_checkpoint(path, kKind, nn::params_of(w));
  w.frozen = header.meta.at("frozen").get<bool>();
  w.metrics = PretrainMetrics::from_json(header.meta.at("metrics"));
  w.fingerprint = w.compute_fingerprint();
  if (w.fingerprint != header.meta.at("fingerprint").get<std::string>()) {
    throw Error(Errc::checksum_mismatch, path.string() + ": tensors do not match the stored fingerprint");
  }
  return w;
}

}  // namespace groundlab::dualenc
