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
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/random.hpp"
#include "groundlab/core/tensor.hpp"
#include "groundlab/nn/layers.hpp"

namespace groundlab::decoder {

enum class FusionVariant { hierarchical_film, single_film, cross_attention };
enum class TapOrder { ascending, descending };

std::string_view to_string(FusionVariant v);
std::string_view to_string(TapOrder t);
/// Throws unknown-variant.
FusionVariant parse_variant(std::string_view s);
TapOrder parse_tap_order(std::string_view s);

struct DecoderConfig {
  std::vector<int> taps{1, 3, 5, 7, 9};
  int encoder_width = 64;  // d_model of the projections
  int embed_dim = 64;      // d_e of the query embedding
  int width = 64;          // D
  int n_heads = 2;
  /// Inner widths of the decoder transformer blocks, as fractions of D.
  int attn_divisor = 2;
  int mlp_divisor = 2;
  int grid = 8;  // patch grid side
  std::vector<int> upsample{4, 4};
  int head_channels = 8;
  FusionVariant variant = FusionVariant::hierarchical_film;
  TapOrder tap_order = TapOrder::ascending;

  int image_size() const;
  int n_tokens() const { return grid * grid; }
  void validate() const;

  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);
  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

/// α(q) and β(q) as single affine maps d_e → D.
struct FiLMLayer {
  nn::Linear alpha;
  nn::Linear beta;

  FiLMLayer() = default;
  /// Identity modulation: zero weights, α bias 1, β bias 0.
  FiLMLayer(int embed_dim, int width);

  void collect(nn::ParamList& out, const std::string& prefix);
};

/// α ⊙ x + β with α, β broadcast over token rows. Throws shape-mismatch.
Mat film_modulate(const RowVec& alpha, const RowVec& beta, const Mat& x);
Mat film_modulate(const FiLMLayer& film, const RowVec& q_e, const Mat& x);

/// x + CrossAttention(LN(x), q_e) with the query embedding as the only key.
struct CrossFusion {
  nn::LayerNorm ln;
  nn::Attention attn;

  void collect(nn::ParamList& out, const std::string& prefix);
};

/// Non-overlapping transposed convolution: each input cell expands to a k×k
/// block of `channels` outputs. weight is cin × (k²·cout), bias is per channel.
struct UpStage {
  Mat weight;
  Mat bias;
  int factor = 1;
  int out_channels = 1;
};

struct MaskHead {
  std::vector<UpStage> stages;

  void collect(nn::ParamList& out, const std::string& prefix);
};

struct PredictionMask {
  int height = 0;
  int width = 0;
  Mat logits;                 // (H·W) × 2, row-major pixels
  std::vector<double> prob;   // foreground probability per pixel
  Mask binary;                // prob > 0.5
};

struct Decoder {
  DecoderConfig config;
  std::vector<nn::Linear> reduce;            // one per tap, d_model → D
  std::vector<FiLMLayer> film;               // |K| for hierarchical, 1 for single, none for cross
  std::vector<CrossFusion> cross;            // |K| for cross_attention only
  std::vector<nn::TransformerBlock> blocks;  // T_1 .. T_{|K|-1}
  MaskHead head;

  void collect(nn::ParamList& out, const std::string& prefix = "");
  std::size_t parameter_count() const;
  std::string fingerprint() const;
};

/// Throws unknown-variant or invalid-argument.
Decoder build_variant(const DecoderConfig& config, std::uint64_t seed);

/// Intermediate states for instrumentation; index i holds stage i+1.
struct DecoderTrace {
  std::vector<Mat> projections;   // P_i after the width reduction
  std::vector<Mat> carried;       // T_{i-1}(D_{i-1}); zeros for stage 1
  std::vector<RowVec> alpha;      // empty rows where the stage has no FiLM
  std::vector<RowVec> beta;
  std::vector<Mat> states;        // D_i
};

struct DecoderCache {
  std::vector<Mat> inputs;  // projections in consumption order
  std::vector<Mat> reduced;
  std::vector<Mat> fused;   // P_i + T_{i-1}(D_{i-1})
  std::vector<RowVec> alpha;
  std::vector<nn::LayerNorm::Cache> cross_ln;
  std::vector<Mat> cross_ln_out;
  std::vector<nn::Attention::Cache> cross_attn;
  std::vector<Mat> states;
  std::vector<nn::TransformerBlock::Cache> blocks;
  RowVec q_e;
  std::vector<Mat> head_pre;   // pre-activation per stage
  std::vector<Mat> head_post;  // stage inputs (post-activation)
  Mat logits;
};

/// Runs the fusion recurrence and returns D_|K|. `projections` follow the
/// encoder's ascending tap order. Throws shape-mismatch when the count or
/// shapes disagree with the config.
Mat decode_hierarchical(const Decoder& dec, const std::vector<Mat>& projections, const RowVec& q_e,
                        DecoderCache* cache = nullptr, DecoderTrace* trace = nullptr);

/// Transposed convolutions to H×W, two-class softmax per pixel, foreground =
/// channel 1. Throws shape-mismatch when the token count is not a square.
PredictionMask mask_head(const MaskHead& head, const Mat& tokens, int height, int width,
                         DecoderCache* cache = nullptr);

/// decode_hierarchical followed by mask_head.
PredictionMask decode(const Decoder& dec, const std::vector<Mat>& projections, const RowVec& q_e,
                      DecoderCache* cache = nullptr);

struct DecoderGradients {
  std::vector<Mat> d_projections;  // ascending tap order, matching the input
  RowVec d_q_e;
};

/// Backward from dLoss/dlogits through the head and the recurrence. Parameter
/// gradients accumulate into `grad`.
DecoderGradients decoder_backward(const Decoder& dec, const DecoderCache& cache, const Mat& d_logits,
                                  Decoder& grad);

}  // namespace groundlab::decoder
