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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/decoder/decoder.hpp"
#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/nn/adam.hpp"
#include "groundlab/scenegen/dataset.hpp"

namespace groundlab::train {

inline constexpr double kBceEps = 1e-7;

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double base_lr = 1e-3;
  double min_lr = 1e-5;
  nn::AdamConfig adam;
  std::uint64_t seed = 1;
  bool freeze_encoder = true;
  std::string variant_tag = "hierarchical_film";
  /// Share of the training split held out for per-epoch validation.
  double val_fraction = 0.1;

  /// Throws invalid-argument unless base_lr > min_lr >= 0, epochs >= 1, batch >= 1.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Mean over pixels of -[g log p + (1-g) log(1-p)] with p clamped to [eps, 1-eps].
/// Throws shape-mismatch.
double pixel_bce(std::span<const double> prob, const Mask& gt, double eps = kBceEps);
/// dLoss/dp per pixel (zero where the clamp is active).
std::vector<double> pixel_bce_grad(std::span<const double> prob, const Mask& gt, double eps = kBceEps);

/// Cosine schedule; throws invalid-argument when step is outside [0, total_steps].
double lr_at_step(long step, long total_steps, const TrainConfig& config);

struct TrainReport {
  std::string variant_tag;
  bool freeze_encoder = true;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_iou;     // per epoch
  /// Loss on the first batch before any update.
  double initial_loss = 0.0;
  double wall_seconds = 0.0;  // not part of the serialised record
  std::string checkpoint_path;
  std::string encoder_fingerprint_before;
  std::string encoder_fingerprint_after;
  std::string decoder_fingerprint;
  std::string dataset_hash;
  std::size_t encoder_params = 0;
  std::size_t decoder_params = 0;
  std::size_t trainable_params = 0;
  double trainable_fraction = 0.0;  // trainable / (encoder + decoder)
  int n_train = 0;
  int n_val = 0;
  nlohmann::json config;

  /// Deterministic record; wall-clock time is excluded so equal runs give equal bytes.
  nlohmann::json to_json() const;
  static TrainReport from_json(const nlohmann::json& j);
};

struct TrainResult {
  decoder::Decoder decoder;
  dualenc::EncoderWeights encoder;
  TrainReport report;
};

using TrainProgress = std::function<void(int epoch, double train_loss, double val_iou)>;

/// Deterministic train/validation partition of `n` samples.
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> val;
};
SplitIndices validation_split(int n, double val_fraction, std::uint64_t seed);

/// Decoder-only training against a frozen encoder with cached features. The
/// encoder fingerprint is re-checked after every epoch (fingerprint-mismatch).
/// NaN loss aborts with nan-loss naming epoch, batch and learning rate.
TrainResult train_decoder(const dualenc::EncoderWeights& encoder, decoder::Decoder decoder,
                          std::span<const scenegen::LabeledSample> samples, const TrainConfig& config,
                          const TrainProgress& progress = {});

/// Same contract with the encoder updated jointly. Requires freeze_encoder = false.
TrainResult train_full_finetune(dualenc::EncoderWeights encoder, decoder::Decoder decoder,
                                std::span<const scenegen::LabeledSample> samples, const TrainConfig& config,
                                const TrainProgress& progress = {});

}  // namespace groundlab::train
