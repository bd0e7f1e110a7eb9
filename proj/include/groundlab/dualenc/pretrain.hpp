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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/scenegen/catalog.hpp"

namespace groundlab::dualenc {

struct CaptionPair {
  Image image;
  std::string caption;
};

/// Sparse scenes of one or two objects (distinct categories, every catalog
/// category eligible). Single objects get any description style; pairs get a
/// left-to-right "x and y" caption. Consecutive runs of `group_size` pairs
/// share one colour.
std::vector<CaptionPair> build_caption_corpus(const scenegen::Catalog& catalog, int n_pairs, std::uint64_t seed,
                                              int image_size = 128, int group_size = 4);

struct PretrainConfig {
  int epochs = 8;
  int batch_size = 32;
  double base_lr = 1e-3;
  double min_lr = 1e-5;
  std::uint64_t seed = 7;
  /// Starting temperature; its log-inverse is learned.
  double initial_temperature = 0.07;
  /// Pairs kept out of training for the retrieval check.
  int holdout = 32;
  /// Epoch shuffles move whole runs of this many consecutive pairs; matches
  /// the corpus colour groups.
  int group_size = 4;
  /// Masked-token pretraining of the text tower (disjoint provenance only).
  int mlm_epochs = 20;
  double mask_prob = 0.3;

  nlohmann::json to_json() const;
};

/// Symmetric in-batch cross-entropy between unit image and text embeddings with
/// logits exp(logit_scale)·I·Tᵀ. Gradients are written when the pointers are set.
/// Throws invalid-argument for batches smaller than two.
double contrastive_loss(const Mat& image_emb, const Mat& text_emb, Real logit_scale, Mat* d_image, Mat* d_text,
                        Real* d_logit_scale);

/// Fraction of captions whose best-scoring image is their own.
double retrieval_top1(const EncoderWeights& w, const Tokenizer& tok, std::span<const CaptionPair> pairs);

using PretrainProgress = std::function<void(int epoch, double loss)>;

/// Unfrozen weights with fingerprint and metrics filled in. The last
/// `config.holdout` pairs are only used for the retrieval metric.
EncoderWeights contrastive_pretrain(std::span<const CaptionPair> pairs, const EncoderConfig& encoder_config,
                                    const PretrainConfig& config, const PretrainProgress& progress = {});

}  // namespace groundlab::dualenc
