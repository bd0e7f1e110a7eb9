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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/random.hpp"
#include "groundlab/core/tensor.hpp"
#include "groundlab/nn/layers.hpp"

namespace groundlab::dualenc {

enum class BackendSize { base, large };
enum class TextPooling { eos, mean };
/// joint: both towers trained contrastively. disjoint: text tower trained alone
/// on masked tokens, vision tower against a frozen random text tower.
enum class TextProvenance { joint, disjoint };

std::string_view to_string(BackendSize b);
std::string_view to_string(TextPooling p);
std::string_view to_string(TextProvenance p);
BackendSize parse_backend(std::string_view s);
TextPooling parse_pooling(std::string_view s);
TextProvenance parse_provenance(std::string_view s);

struct EncoderConfig {
  int image_size = 128;
  int patch_size = 16;
  int n_vision_blocks = 10;
  int n_text_blocks = 4;
  int d_model = 64;
  int n_heads = 4;
  int d_embed = 64;
  int mlp_ratio = 4;
  int max_text_len = 16;
  std::vector<int> taps{1, 3, 5, 7, 9};
  BackendSize backend = BackendSize::base;
  TextPooling pooling = TextPooling::eos;
  TextProvenance provenance = TextProvenance::joint;
  /// Content words; special tokens are added by the tokenizer.
  std::vector<std::string> vocabulary;

  static EncoderConfig preset(BackendSize size);

  int grid() const { return image_size / patch_size; }
  int n_patches() const { return grid() * grid(); }
  /// Throws invalid-argument naming the violated invariant.
  void validate() const;

  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kEos = 2;
  static constexpr int kMask = 3;
  static constexpr int kSpecials = 4;

  Tokenizer(const std::vector<std::string>& vocabulary, int max_len);

  /// Lower-cased, punctuation-stripped words looked up in the vocabulary, then
  /// EOS, then padding to max_len. Long inputs are truncated so EOS always fits.
  std::vector<int> tokenize(std::string_view text) const;
  /// Index of the EOS token in a tokenized sequence.
  static int eos_position(const std::vector<int>& ids);
  int size() const { return static_cast<int>(words_.size()); }
  int max_len() const { return max_len_; }
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  int max_len_;
};

struct VisionTower {
  nn::Linear patch_embed;
  Mat cls;
  Mat pos;
  std::vector<nn::TransformerBlock> blocks;
  nn::LayerNorm ln_post;
  nn::Linear proj;

  void collect(nn::ParamList& out, const std::string& prefix);
};

struct TextTower {
  Mat token_embed;
  Mat pos;
  std::vector<nn::TransformerBlock> blocks;
  nn::LayerNorm ln_final;
  nn::Linear proj;

  void collect(nn::ParamList& out, const std::string& prefix);
};

struct PretrainMetrics {
  std::vector<double> epoch_loss;
  double retrieval_top1 = 0.0;
  int n_pairs = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static PretrainMetrics from_json(const nlohmann::json& j);
  friend bool operator==(const PretrainMetrics&, const PretrainMetrics&) = default;
};

struct EncoderWeights {
  EncoderConfig config;
  VisionTower vision;
  TextTower text;
  Mat logit_scale;  // 1×1, log of the inverse temperature
  bool frozen = false;
  std::string fingerprint;
  PretrainMetrics metrics;

  /// Random initialisation for `config` (validated).
  static EncoderWeights init(const EncoderConfig& config, std::uint64_t seed);

  void collect(nn::ParamList& out, const std::string& prefix = "");
  /// SHA-256 over parameter names, shapes and values.
  std::string compute_fingerprint() const;
  std::size_t parameter_count() const;
};

/// Returns frozen weights with the fingerprint recorded. Idempotent.
EncoderWeights freeze(EncoderWeights weights);

struct VisualProjections {
  std::vector<int> taps;       // ascending block indices
  std::vector<Mat> features;   // n_patches × d_model each, class token dropped
};

struct ImageEncoding {
  VisualProjections projections;
  RowVec global;  // unit length, d_embed
};

struct VisionCache {
  Mat patches;
  std::vector<Mat> inputs;  // residual stream entering each block
  std::vector<nn::TransformerBlock::Cache> blocks;
  Mat final_state;
  nn::LayerNorm::Cache ln;
  Mat ln_out;
  Real norm = 1.0;
  RowVec global;
};

struct TextCache {
  std::vector<int> ids;  // up to and including EOS
  std::vector<Mat> inputs;
  std::vector<nn::TransformerBlock::Cache> blocks;
  Mat final_state;
  nn::LayerNorm::Cache ln;
  Mat ln_out;
  RowVec pooled;
  Real norm = 1.0;
  RowVec embedding;
};

/// Throws shape-mismatch when the image size differs from the config.
ImageEncoding encode_image(const EncoderWeights& w, const Image& image);
/// Same, tapping an explicit ascending set of block indices.
ImageEncoding encode_image(const EncoderWeights& w, const Image& image, const std::vector<int>& taps);
/// Unit-length query embedding.
RowVec encode_text(const EncoderWeights& w, const Tokenizer& tok, std::string_view text);

/// Full forward with caches for training. `taps` may be empty.
ImageEncoding vision_forward(const EncoderWeights& w, const Image& image, const std::vector<int>& taps,
                             VisionCache& cache);
/// d_taps lines up with `taps` from the forward (entries may be empty); d_global may be empty.
void vision_backward(const EncoderWeights& w, const VisionCache& cache, const std::vector<int>& taps,
                     const std::vector<Mat>& d_taps, const RowVec& d_global, EncoderWeights& grad);

RowVec text_forward(const EncoderWeights& w, const std::vector<int>& ids, TextCache& cache);
void text_backward(const EncoderWeights& w, const TextCache& cache, const RowVec& d_embedding,
                   EncoderWeights& grad);
/// Final hidden states (after the last LayerNorm) for every token up to EOS.
const Mat& text_hidden(const TextCache& cache);
/// Backward from a gradient on text_hidden (masked-token objective).
void text_backward_hidden(const EncoderWeights& w, const TextCache& cache, const Mat& d_hidden,
                          EncoderWeights& grad);

}  // namespace groundlab::dualenc
