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

#include "groundlab/decoder/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "groundlab/core/error.hpp"
#include "groundlab/kernels/kernels.hpp"
#include "groundlab/nn/params.hpp"

namespace groundlab::decoder {

namespace {

constexpr Real kBlockInitStd = 0.02;
// Referred objects cover a few percent of the image. The last head stage starts
// small and biased toward background so early steps are not spent unlearning
// a 50/50 guess on every pixel.
constexpr Real kForegroundPrior = 0.02;
constexpr Real kLastStageGain = 0.1;

int int_sqrt_exact(Eigen::Index n) {
  const auto r = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? static_cast<int>(r) : -1;
}

bool has_film(const Decoder& dec, std::size_t stage) {
  switch (dec.config.variant) {
    case FusionVariant::hierarchical_film: return true;
    case FusionVariant::single_film: return stage == 0;
    case FusionVariant::cross_attention: return false;
  }
  return false;
}

RowVec affine(const nn::Linear& l, const RowVec& q) {
  Mat y;
  l.forward(q, y);
  return y.row(0);
}

}  // namespace

std::string_view to_string(FusionVariant v) {
  switch (v) {
    case FusionVariant::hierarchical_film: return "hierarchical_film";
    case FusionVariant::single_film: return "single_film";
    case FusionVariant::cross_attention: return "cross_attention";
  }
  return "?";
}

std::string_view to_string(TapOrder t) { return t == TapOrder::ascending ? "ascending" : "descending"; }

FusionVariant parse_variant(std::string_view s) {
  for (auto v : {FusionVariant::hierarchical_film, FusionVariant::single_film, FusionVariant::cross_attention}) {
    if (to_string(v) == s) return v;
  }
  throw Error(Errc::unknown_variant, "'" + std::string(s) + "'");
}

TapOrder parse_tap_order(std::string_view s) {
  if (s == "ascending") return TapOrder::ascending;
  if (s == "descending") return TapOrder::descending;
  throw Error(Errc::invalid_argument, "unknown tap order '" + std::string(s) + "'");
}

// ---- config ---------------------------------------------------------------

int DecoderConfig::image_size() const {
  int side = grid;
  for (int f : upsample) side *= f;
  return side;
}

void DecoderConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::invalid_argument, "decoder config: " + m); };
  if (taps.size() < 2) fail("needs at least two taps");
  if (width < 1 || encoder_width < 1 || embed_dim < 1 || grid < 1) fail("sizes must be positive");
  if (n_heads < 1 || attn_divisor < 1 || mlp_divisor < 1) fail("head and divisor counts must be positive");
  if ((width / attn_divisor) % n_heads != 0 || width / attn_divisor < 1) fail("attention width not divisible by heads");
  if (width % n_heads != 0) fail("width not divisible by heads");
  if (width / mlp_divisor < 1) fail("mlp width must be positive");
  if (upsample.empty()) fail("needs at least one upsampling stage");
  for (int f : upsample) {
    if (f < 1) fail("upsampling factors must be positive");
  }
  if (head_channels < 1) fail("head_channels must be positive");
}

nlohmann::json DecoderConfig::to_json() const {
  return {{"taps", taps},
          {"encoder_width", encoder_width},
          {"embed_dim", embed_dim},
          {"width", width},
          {"n_heads", n_heads},
          {"attn_divisor", attn_divisor},
          {"mlp_divisor", mlp_divisor},
          {"grid", grid},
          {"upsample", upsample},
          {"head_channels", head_channels},
          {"variant", std::string(to_string(variant))},
          {"tap_order", std::string(to_string(tap_order))}};
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  DecoderConfig c;
  c.taps = j.at("taps").get<std::vector<int>>();
  c.encoder_width = j.at("encoder_width").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.width = j.at("width").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.attn_divisor = j.at("attn_divisor").get<int>();
  c.mlp_divisor = j.at("mlp_divisor").get<int>();
  c.grid = j.at("grid").get<int>();
  c.upsample = j.at("upsample").get<std::vector<int>>();
  c.head_channels = j.at("head_channels").get<int>();
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.tap_order = parse_tap_order(j.at("tap_order").get<std::string>());
  return c;
}

// ---- FiLM -----------------------------------------------------------------

FiLMLayer::FiLMLayer(int embed_dim, int width) : alpha(embed_dim, width), beta(embed_dim, width) {
  alpha.bias.setOnes();
}

void FiLMLayer::collect(nn::ParamList& out, const std::string& prefix) {
  alpha.collect(out, prefix + "alpha.");
  beta.collect(out, prefix + "beta.");
}

Mat film_modulate(const RowVec& alpha, const RowVec& beta, const Mat& x) {
  if (alpha.size() != x.cols() || beta.size() != x.cols()) {
    throw Error(Errc::shape_mismatch, "film: modulation width " + std::to_string(alpha.size()) +
                                          " vs activation width " + std::to_string(x.cols()));
  }
  return (x.array().rowwise() * alpha.array()).rowwise() + beta.array();
}

Mat film_modulate(const FiLMLayer& film, const RowVec& q_e, const Mat& x) {
  if (q_e.size() != film.alpha.in_dim()) throw Error(Errc::shape_mismatch, "film: query embedding width");
  return film_modulate(affine(film.alpha, q_e), affine(film.beta, q_e), x);
}

void CrossFusion::collect(nn::ParamList& out, const std::string& prefix) {
  ln.collect(out, prefix + "ln.");
  attn.collect(out, prefix + "attn.");
}

void MaskHead::collect(nn::ParamList& out, const std::string& prefix) {
  for (std::size_t s = 0; s < stages.size(); ++s) {
    out.push_back({prefix + "up" + std::to_string(s + 1) + ".weight", &stages[s].weight});
    out.push_back({prefix + "up" + std::to_string(s + 1) + ".bias", &stages[s].bias});
  }
}

// ---- decoder --------------------------------------------------------------

void Decoder::collect(nn::ParamList& out, const std::string& prefix) {
  for (std::size_t i = 0; i < reduce.size(); ++i) reduce[i].collect(out, prefix + "reduce" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < film.size(); ++i) film[i].collect(out, prefix + "film" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < cross.size(); ++i) cross[i].collect(out, prefix + "cross" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].collect(out, prefix + "block" + std::to_string(i + 1) + ".");
  head.collect(out, prefix + "head.");
}

std::size_t Decoder::parameter_count() const { return nn::count_params(nn::params_of(*this)); }

std::string Decoder::fingerprint() const { return nn::fingerprint(nn::params_of(*this)); }

Decoder build_variant(const DecoderConfig& config, std::uint64_t seed) {
  config.validate();
  Decoder dec;
  dec.config = config;
  Rng rng(derive_seed(seed, 0x646563));
  const int k = static_cast<int>(config.taps.size());
  const int d = config.width;
  for (int i = 0; i < k; ++i) {
    dec.reduce.emplace_back(config.encoder_width, d);
    dec.reduce.back().init(rng, 1.0 / std::sqrt(static_cast<Real>(config.encoder_width)));
  }
  switch (config.variant) {
    case FusionVariant::hierarchical_film:
      for (int i = 0; i < k; ++i) dec.film.emplace_back(config.embed_dim, d);
      break;
    case FusionVariant::single_film:
      dec.film.emplace_back(config.embed_dim, d);
      break;
    case FusionVariant::cross_attention:
      for (int i = 0; i < k; ++i) {
        CrossFusion cf{nn::LayerNorm(d), nn::Attention(d, config.embed_dim, d, config.n_heads, false)};
        cf.attn.init(rng, kBlockInitStd);
        dec.cross.push_back(std::move(cf));
      }
      break;
  }
  for (int i = 1; i < k; ++i) {
    dec.blocks.emplace_back(d, d / config.attn_divisor, config.n_heads, d / config.mlp_divisor, false);
    dec.blocks.back().init(rng, kBlockInitStd);
  }
  int cin = d;
  for (std::size_t s = 0; s < config.upsample.size(); ++s) {
    const bool last = s + 1 == config.upsample.size();
    UpStage st;
    st.factor = config.upsample[s];
    st.out_channels = last ? 2 : config.head_channels;
    st.weight = Mat::Zero(cin, st.factor * st.factor * st.out_channels);
    const Real std = (last ? kLastStageGain : 1.0) / std::sqrt(static_cast<Real>(cin));
    for (Eigen::Index i = 0; i < st.weight.size(); ++i) st.weight.data()[i] = std * rng.normal();
    st.bias = Mat::Zero(1, st.out_channels);
    if (last) {
      const Real logit = std::log((1.0 - kForegroundPrior) / kForegroundPrior);
      st.bias(0, 0) = 0.5 * logit;
      st.bias(0, 1) = -0.5 * logit;
    }
    cin = st.out_channels;
    dec.head.stages.push_back(std::move(st));
  }
  return dec;
}

Mat decode_hierarchical(const Decoder& dec, const std::vector<Mat>& projections, const RowVec& q_e,
                        DecoderCache* cache, DecoderTrace* trace) {
  const DecoderConfig& cfg = dec.config;
  const std::size_t k = cfg.taps.size();
  if (projections.size() != k) {
    throw Error(Errc::shape_mismatch, "decoder expects " + std::to_string(k) + " projections, got " +
                                          std::to_string(projections.size()));
  }
  for (const auto& p : projections) {
    if (p.cols() != cfg.encoder_width || p.rows() != projections.front().rows()) {
      throw Error(Errc::shape_mismatch, "projection shapes disagree with the decoder config");
    }
  }
  if (q_e.size() != cfg.embed_dim) throw Error(Errc::shape_mismatch, "query embedding width");

  DecoderCache local;
  DecoderCache& c = cache != nullptr ? *cache : local;
  c.q_e = q_e;
  c.inputs.assign(projections.begin(), projections.end());
  if (cfg.tap_order == TapOrder::descending) std::reverse(c.inputs.begin(), c.inputs.end());
  c.reduced.resize(k);
  c.fused.resize(k);
  c.alpha.assign(k, RowVec());
  c.states.resize(k);
  c.blocks.resize(k > 0 ? k - 1 : 0);
  if (cfg.variant == FusionVariant::cross_attention) {
    c.cross_ln.resize(k);
    c.cross_ln_out.resize(k);
    c.cross_attn.resize(k);
  }
  if (trace != nullptr) *trace = DecoderTrace{};

  const Mat q_ctx = q_e;
  for (std::size_t i = 0; i < k; ++i) {
    dec.reduce[i].forward(c.inputs[i], c.reduced[i]);
    Mat carried;
    if (i == 0) {
      carried = Mat::Zero(c.reduced[i].rows(), c.reduced[i].cols());
      c.fused[i] = c.reduced[i];
    } else {
      dec.blocks[i - 1].forward(c.states[i - 1], carried, c.blocks[i - 1]);
      c.fused[i] = c.reduced[i] + carried;
    }
    RowVec beta;
    if (has_film(dec, i)) {
      const FiLMLayer& f = dec.film[cfg.variant == FusionVariant::hierarchical_film ? i : 0];
      c.alpha[i] = affine(f.alpha, q_e);
      beta = affine(f.beta, q_e);
      c.states[i] = film_modulate(c.alpha[i], beta, c.fused[i]);
    } else if (cfg.variant == FusionVariant::cross_attention) {
      const CrossFusion& cf = dec.cross[i];
      cf.ln.forward(c.fused[i], c.cross_ln_out[i], c.cross_ln[i]);
      Mat a;
      cf.attn.forward(c.cross_ln_out[i], q_ctx, a, c.cross_attn[i]);
      c.states[i] = c.fused[i] + a;
    } else {
      c.states[i] = c.fused[i];
    }
    if (trace != nullptr) {
      trace->projections.push_back(c.reduced[i]);
      trace->carried.push_back(carried);
      trace->alpha.push_back(c.alpha[i]);
      trace->beta.push_back(beta);
      trace->states.push_back(c.states[i]);
    }
  }
  return c.states.back();
}

PredictionMask mask_head(const MaskHead& head, const Mat& tokens, int height, int width, DecoderCache* cache) {
  int side = int_sqrt_exact(tokens.rows());
  if (side < 0) {
    throw Error(Errc::shape_mismatch, std::to_string(tokens.rows()) + " tokens do not form a square grid");
  }
  int out_side = side;
  for (const auto& st : head.stages) out_side *= st.factor;
  if (out_side != height || out_side != width) {
    throw Error(Errc::shape_mismatch, "mask head reaches " + std::to_string(out_side) + " pixels, target is " +
                                          std::to_string(height) + "x" + std::to_string(width));
  }
  if (head.stages.empty() || head.stages.back().out_channels != 2) {
    throw Error(Errc::invalid_argument, "mask head must end in two channels");
  }
  DecoderCache local;
  DecoderCache& c = cache != nullptr ? *cache : local;
  c.head_pre.resize(head.stages.size());
  c.head_post.resize(head.stages.size());
  Mat x = tokens;
  for (std::size_t s = 0; s < head.stages.size(); ++s) {
    const UpStage& st = head.stages[s];
    if (x.cols() != st.weight.rows()) throw Error(Errc::shape_mismatch, "mask head: channel count");
    c.head_post[s] = x;
    const Mat cols = x * st.weight;
    Mat grid;
    kernels::omp::blocks_scatter(cols, side, st.factor, st.out_channels, grid);
    grid.rowwise() += st.bias.row(0);
    side *= st.factor;
    c.head_pre[s] = grid;
    if (s + 1 < head.stages.size()) nn::gelu_forward(grid, x);
  }
  PredictionMask pm;
  pm.height = height;
  pm.width = width;
  pm.logits = c.head_pre.back();
  c.logits = pm.logits;
  const auto n = static_cast<std::size_t>(pm.logits.rows());
  pm.prob.resize(n);
  pm.binary = Mask(height, width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Real z = pm.logits(r, 0) - pm.logits(r, 1);
    const Real p = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    pm.prob[i] = p;
    pm.binary.bits[i] = p > 0.5 ? 1 : 0;
  }
  return pm;
}

PredictionMask decode(const Decoder& dec, const std::vector<Mat>& projections, const RowVec& q_e,
                      DecoderCache* cache) {
  DecoderCache local;
  DecoderCache& c = cache != nullptr ? *cache : local;
  const Mat state = decode_hierarchical(dec, projections, q_e, &c);
  const int side = dec.config.image_size();
  return mask_head(dec.head, state, side, side, &c);
}

DecoderGradients decoder_backward(const Decoder& dec, const DecoderCache& c, const Mat& d_logits, Decoder& grad) {
  const DecoderConfig& cfg = dec.config;
  // Mask head.
  Mat d = d_logits;
  int side = cfg.grid;
  std::vector<int> sides;
  for (const auto& st : dec.head.stages) {
    sides.push_back(side);
    side *= st.factor;
  }
  for (std::size_t s = dec.head.stages.size(); s-- > 0;) {
    const UpStage& st = dec.head.stages[s];
    UpStage& g = grad.head.stages[s];
    g.bias.row(0) += d.colwise().sum();
    Mat dcols;
    kernels::omp::blocks_gather(d, sides[s], st.factor, st.out_channels, dcols);
    g.weight.noalias() += c.head_post[s].transpose() * dcols;
    Mat dx = dcols * st.weight.transpose();
    if (s > 0) {
      nn::gelu_backward(c.head_pre[s - 1], dx, d);
    } else {
      d = std::move(dx);
    }
  }

  // Fusion recurrence.
  const std::size_t k = cfg.taps.size();
  DecoderGradients out;
  out.d_q_e = RowVec::Zero(cfg.embed_dim);
  std::vector<Mat> d_inputs(k);
  Mat dstate = std::move(d);
  const Mat q_mat = c.q_e;
  for (std::size_t i = k; i-- > 0;) {
    Mat dfused;
    if (has_film(dec, i)) {
      const std::size_t f = cfg.variant == FusionVariant::hierarchical_film ? i : 0;
      const RowVec dalpha = (dstate.array() * c.fused[i].array()).colwise().sum();
      const RowVec dbeta = dstate.colwise().sum();
      Mat dq;
      dec.film[f].alpha.backward(q_mat, dalpha, grad.film[f].alpha, &dq);
      out.d_q_e += dq.row(0);
      dec.film[f].beta.backward(q_mat, dbeta, grad.film[f].beta, &dq);
      out.d_q_e += dq.row(0);
      dfused = dstate.array().rowwise() * c.alpha[i].array();
    } else if (cfg.variant == FusionVariant::cross_attention) {
      Mat dln_out, dctx, dln_in;
      dec.cross[i].attn.backward(dstate, c.cross_attn[i], grad.cross[i].attn, dln_out, dctx);
      out.d_q_e += dctx.row(0);
      dec.cross[i].ln.backward(dln_out, c.cross_ln[i], grad.cross[i].ln, dln_in);
      dfused = dstate + dln_in;
    } else {
      dfused = dstate;
    }
    dec.reduce[i].backward(c.inputs[i], dfused, grad.reduce[i], &d_inputs[i]);
    if (i > 0) {
      Mat dprev;
      dec.blocks[i - 1].backward(dfused, c.blocks[i - 1], grad.blocks[i - 1], dprev);
      dstate = std::move(dprev);
    }
  }
  if (cfg.tap_order == TapOrder::descending) std::reverse(d_inputs.begin(), d_inputs.end());
  out.d_projections = std::move(d_inputs);
  return out;
}

}  // namespace groundlab::decoder
