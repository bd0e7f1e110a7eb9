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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/cli/config.hpp"
#include "groundlab/decoder/decoder.hpp"
#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/evalkit/evaluate.hpp"
#include "groundlab/scenegen/dataset.hpp"
#include "groundlab/train/train.hpp"

namespace groundlab::cli {

using Log = std::function<void(const std::string&)>;

std::filesystem::path data_dir(const RunConfig& config);
std::filesystem::path encoder_path(const RunConfig& config);
/// decoder.checkpoint when set, else <out>/decoder_<tag>.glck ('+' becomes '.').
std::filesystem::path decoder_path(const RunConfig& config, const std::string& tag);

/// (config hash, dataset hash, seed) attached to every artifact.
nlohmann::json provenance(const RunConfig& config, const std::string& dataset_hash);

/// Loads the dataset under data_dir when present, else builds and persists it.
/// Throws fingerprint-mismatch when a stored dataset has a different config.
scenegen::DatasetSplit obtain_dataset(const RunConfig& config, const Log& log);

/// Contrastive pretraining on the caption corpus, then freeze and save.
dualenc::EncoderWeights pretrain_encoder(const RunConfig& config, const scenegen::Catalog& catalog,
                                         const std::vector<std::string>& vocabulary, const Log& log);

/// Loads encoder_path when it exists, else pretrains. Throws fingerprint-mismatch
/// when the stored encoder config differs from the resolved one.
dualenc::EncoderWeights obtain_encoder(const RunConfig& config, const scenegen::DatasetSplit& data, const Log& log);

decoder::DecoderConfig decoder_config(const RunConfig& config, const dualenc::EncoderConfig& encoder);

/// Trains the configured variant (frozen or full finetune) and writes the
/// decoder checkpoint and train_report_<tag>.json into the output directory.
train::TrainResult train_variant(const RunConfig& config, const scenegen::DatasetSplit& data,
                                 const dualenc::EncoderWeights& encoder, const Log& log);

/// Decoder reports on test_seen and test_unseen; the unseen one carries an SA score.
std::vector<evalkit::MetricsReport> evaluate_decoder(const RunConfig& config, const scenegen::DatasetSplit& data,
                                                     const dualenc::EncoderWeights& encoder,
                                                     const decoder::Decoder& dec, const std::string& tag);

/// Detector-alone and hybrid reports on test_unseen.
std::vector<evalkit::MetricsReport> evaluate_hybrid(const RunConfig& config, const scenegen::DatasetSplit& data,
                                                    const dualenc::EncoderWeights& encoder,
                                                    const decoder::Decoder& dec, const std::string& tag);

/// Mean SA over the first `trials` samples of `samples` (sample-id order).
double sa_for(const evalkit::Predictor& predictor, const scenegen::DatasetSplit& data,
              std::span<const scenegen::LabeledSample> samples, int trials, std::uint64_t seed);

/// Everything the trend checks need from one seed.
struct SeedOutcome {
  std::uint64_t seed = 0;
  evalkit::MetricsReport hier_seen;
  evalkit::MetricsReport hier_unseen;
  evalkit::MetricsReport cross_unseen;
  evalkit::MetricsReport full_unseen;
  evalkit::MetricsReport detector_unseen;
  evalkit::MetricsReport hybrid_unseen;
  double hier_trainable_fraction = 0.0;
  std::vector<evalkit::MetricsReport> all() const;
};

/// Dataset, frozen hierarchical and cross-attention decoders, the full
/// finetune baseline, detector and hybrid, under <out>/seed_<seed>.
SeedOutcome run_seed(const RunConfig& base, std::uint64_t seed, const dualenc::EncoderWeights& encoder,
                     const Log& log);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Seeded trend checks 8..13 over the per-seed outcomes.
std::vector<CriterionResult> trend_criteria(std::span<const SeedOutcome> outcomes);

std::string criteria_table(std::span<const CriterionResult> results);

}  // namespace groundlab::cli
