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

#include "groundlab/dualenc/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "groundlab/core/error.hpp"
#include "groundlab/kernels/kernels.hpp"
#include "groundlab/nn/params.hpp"

namespace groundlab::dualenc {

namespace {

constexpr Real kInitStd = 0.02;

template <typename E>
E parse_enum(std::string_view s, std::initializer_list<E> values, const char* what) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  throw Error(Errc::invalid_argument, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

void init_matrix(Mat& m, Rng& rng, Real std) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std * rng.normal();
}

// Fan-in scaled weights; residual outputs shrunk by depth so the stream stays O(1).
void init_block(nn::TransformerBlock& b, Rng& rng, int depth) {
  const auto fan_in = [](const nn::Linear& l) { return 1.0 / std::sqrt(static_cast<Real>(l.in_dim())); };
  const Real shrink = 1.0 / std::sqrt(2.0 * depth);
  b.attn.q.init(rng, fan_in(b.attn.q));
  b.attn.k.init(rng, fan_in(b.attn.k));
  b.attn.v.init(rng, fan_in(b.attn.v));
  b.attn.out.init(rng, fan_in(b.attn.out) * shrink);
  b.fc1.init(rng, fan_in(b.fc1));
  b.fc2.init(rng, fan_in(b.fc2) * shrink);
}

// Per-image, per-channel standardisation of the patch matrix. Removes the global
// brightness gain so lighting does not dominate the representation.
void standardize_channels(Mat& patches) {
  for (int ch = 0; ch < 3; ++ch) {
    Real sum = 0.0, sq = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index j = ch; j < patches.cols(); j += 3) {
      sum += patches.col(j).sum();
      sq += patches.col(j).squaredNorm();
      count += patches.rows();
    }
    const Real mean = sum / static_cast<Real>(count);
    const Real var = std::max(sq / static_cast<Real>(count) - mean * mean, Real{0});
    const Real inv = 1.0 / std::sqrt(var + 1e-4);
    for (Eigen::Index j = ch; j < patches.cols(); j += 3) patches.col(j) = (patches.col(j).array() - mean) * inv;
  }
}

bool text_causal(const EncoderConfig& c) { return c.provenance == TextProvenance::joint; }

}  // namespace

std::string_view to_string(BackendSize b) { return b == BackendSize::base ? "base" : "large"; }
std::string_view to_string(TextPooling p) { return p == TextPooling::eos ? "eos" : "mean"; }
std::string_view to_string(TextProvenance p) { return p == TextProvenance::joint ? "joint" : "disjoint"; }

BackendSize parse_backend(std::string_view s) {
  return parse_enum(s, {BackendSize::base, BackendSize::large}, "backend");
}
TextPooling parse_pooling(std::string_view s) {
  return parse_enum(s, {TextPooling::eos, TextPooling::mean}, "text pooling");
}
TextProvenance parse_provenance(std::string_view s) {
  return parse_enum(s, {TextProvenance::joint, TextProvenance::disjoint}, "text provenance");
}

// ---- config ---------------------------------------------------------------

EncoderConfig EncoderConfig::preset(BackendSize size) {
  EncoderConfig c;
  c.backend = size;
  if (size == BackendSize::large) {
    c.n_vision_blocks = 12;
    c.d_model = 96;
  }
  return c;
}

void EncoderConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(Errc::invalid_argument, "encoder config: " + m); };
  if (patch_size <= 0 || image_size <= 0 || image_size % patch_size != 0) {
    fail("image side must be divisible by patch_size");
  }
  if (taps.size() < 2) fail("tap set needs at least two blocks");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 1 || taps[i] > n_vision_blocks) fail("tap index outside 1..n_vision_blocks");
    if (i > 0 && taps[i] <= taps[i - 1]) fail("tap set must be strictly ascending");
  }
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (n_vision_blocks < 1 || n_text_blocks < 1 || d_embed < 1 || mlp_ratio < 1) fail("sizes must be positive");
  if (max_text_len < 2) fail("max_text_len must be at least 2");
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"image_size", image_size},
          {"patch_size", patch_size},
          {"n_vision_blocks", n_vision_blocks},
          {"n_text_blocks", n_text_blocks},
          {"d_model", d_model},
          {"n_heads", n_heads},
          {"d_embed", d_embed},
          {"mlp_ratio", mlp_ratio},
          {"max_text_len", max_text_len},
          {"taps", taps},
          {"backend", std::string(to_string(backend))},
          {"pooling", std::string(to_string(pooling))},
          {"provenance", std::string(to_string(provenance))},
          {"vocabulary", vocabulary}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.image_size = j.at("image_size").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.n_vision_blocks = j.at("n_vision_blocks").get<int>();
  c.n_text_blocks = j.at("n_text_blocks").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_embed = j.at("d_embed").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  c.max_text_len = j.at("max_text_len").get<int>();
  c.taps = j.at("taps").get<std::vector<int>>();
  c.backend = parse_backend(j.at("backend").get<std::string>());
  c.pooling = parse_pooling(j.at("pooling").get<std::string>());
  c.provenance = parse_provenance(j.at("provenance").get<std::string>());
  c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  return c;
}

// ---- tokenizer ------------------------------------------------------------

Tokenizer::Tokenizer(const std::vector<std::string>& vocabulary, int max_len) : max_len_(max_len) {
  if (max_len < 1) throw Error(Errc::invalid_argument, "tokenizer: max_len must be positive");
  words_ = {"<pad>", "<unk>", "<eos>", "<mask>"};
  for (const auto& w : vocabulary) {
    if (index_.count(w) != 0) continue;
    index_.emplace(w, static_cast<int>(words_.size()));
    words_.push_back(w);
  }
}

std::vector<int> Tokenizer::tokenize(std::string_view text) const {
  std::vector<int> ids;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    auto it = index_.find(word);
    ids.push_back(it == index_.end() ? kUnk : it->second);
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '-') {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (ch == '\'') {
      continue;
    } else {
      flush();
    }
  }
  flush();
  if (static_cast<int>(ids.size()) > max_len_ - 1) ids.resize(static_cast<std::size_t>(max_len_ - 1));
  ids.push_back(kEos);
  ids.resize(static_cast<std::size_t>(max_len_), kPad);
  return ids;
}

int Tokenizer::eos_position(const std::vector<int>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == kEos) return static_cast<int>(i);
  }
  throw Error(Errc::invalid_argument, "token sequence has no EOS");
}

// ---- weights --------------------------------------------------------------

void VisionTower::collect(nn::ParamList& out, const std::string& prefix) {
  patch_embed.collect(out, prefix + "patch_embed.");
  out.push_back({prefix + "cls", &cls});
  out.push_back({prefix + "pos", &pos});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].collect(out, prefix + "block" + std::to_string(i + 1) + ".");
  }
  ln_post.collect(out, prefix + "ln_post.");
  proj.collect(out, prefix + "proj.");
}

void TextTower::collect(nn::ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "token_embed", &token_embed});
  out.push_back({prefix + "pos", &pos});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].collect(out, prefix + "block" + std::to_string(i + 1) + ".");
  }
  ln_final.collect(out, prefix + "ln_final.");
  proj.collect(out, prefix + "proj.");
}

nlohmann::json PretrainMetrics::to_json() const {
  return {{"epoch_loss", epoch_loss}, {"retrieval_top1", retrieval_top1}, {"n_pairs", n_pairs}, {"seed", seed}};
}

PretrainMetrics PretrainMetrics::from_json(const nlohmann::json& j) {
  PretrainMetrics m;
  m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
  m.retrieval_top1 = j.at("retrieval_top1").get<double>();
  m.n_pairs = j.at("n_pairs").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

EncoderWeights EncoderWeights::init(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderWeights w;
  w.config = config;
  const int d = config.d_model;
  const int mlp = d * config.mlp_ratio;
  const int patch_dim = 3 * config.patch_size * config.patch_size;
  Rng rng(derive_seed(seed, 0x656e63));

  VisionTower& v = w.vision;
  v.patch_embed = nn::Linear(patch_dim, d);
  v.patch_embed.init(rng, 1.0 / std::sqrt(static_cast<Real>(patch_dim)));
  v.cls = Mat::Zero(1, d);
  init_matrix(v.cls, rng, kInitStd);
  v.pos = Mat::Zero(config.n_patches() + 1, d);
  init_matrix(v.pos, rng, kInitStd);
  for (int i = 0; i < config.n_vision_blocks; ++i) {
    v.blocks.emplace_back(d, d, config.n_heads, mlp, false);
    init_block(v.blocks.back(), rng, config.n_vision_blocks);
  }
  v.ln_post = nn::LayerNorm(d);
  v.proj = nn::Linear(d, config.d_embed);
  v.proj.init(rng, 1.0 / std::sqrt(static_cast<Real>(d)));

  const Tokenizer tok(config.vocabulary, config.max_text_len);
  TextTower& t = w.text;
  t.token_embed = Mat::Zero(tok.size(), d);
  init_matrix(t.token_embed, rng, kInitStd);
  t.pos = Mat::Zero(config.max_text_len, d);
  init_matrix(t.pos, rng, kInitStd);
  for (int i = 0; i < config.n_text_blocks; ++i) {
    t.blocks.emplace_back(d, d, config.n_heads, mlp, text_causal(config));
    init_block(t.blocks.back(), rng, config.n_text_blocks);
  }
  t.ln_final = nn::LayerNorm(d);
  t.proj = nn::Linear(d, config.d_embed);
  t.proj.init(rng, 1.0 / std::sqrt(static_cast<Real>(d)));

  w.logit_scale = Mat::Constant(1, 1, std::log(1.0 / 0.07));
  return w;
}

void EncoderWeights::collect(nn::ParamList& out, const std::string& prefix) {
  vision.collect(out, prefix + "vision.");
  text.collect(out, prefix + "text.");
  out.push_back({prefix + "logit_scale", &logit_scale});
}

std::string EncoderWeights::compute_fingerprint() const { return nn::fingerprint(nn::params_of(*this)); }

std::size_t EncoderWeights::parameter_count() const { return nn::count_params(nn::params_of(*this)); }

EncoderWeights freeze(EncoderWeights weights) {
  weights.frozen = true;
  weights.fingerprint = weights.compute_fingerprint();
  return weights;
}

// ---- vision ---------------------------------------------------------------

ImageEncoding vision_forward(const EncoderWeights& w, const Image& image, const std::vector<int>& taps,
                             VisionCache& c) {
  const EncoderConfig& cfg = w.config;
  if (image.height != cfg.image_size || image.width != cfg.image_size) {
    throw Error(Errc::shape_mismatch, "image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                                          ", encoder expects " + std::to_string(cfg.image_size));
  }
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 1 || taps[i] > cfg.n_vision_blocks || (i > 0 && taps[i] <= taps[i - 1])) {
      throw Error(Errc::invalid_argument, "tap set must be ascending within 1..n_vision_blocks");
    }
  }
  const int np = cfg.n_patches();
  kernels::omp::patchify(image, cfg.patch_size, c.patches);
  standardize_channels(c.patches);
  Mat embedded;
  w.vision.patch_embed.forward(c.patches, embedded);

  Mat x(np + 1, cfg.d_model);
  x.row(0) = w.vision.cls.row(0);
  x.bottomRows(np) = embedded;
  x += w.vision.pos;

  ImageEncoding enc;
  enc.projections.taps = taps;
  const std::size_t nb = w.vision.blocks.size();
  c.inputs.resize(nb);
  c.blocks.resize(nb);
  std::size_t next_tap = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    c.inputs[b] = x;
    w.vision.blocks[b].forward(c.inputs[b], x, c.blocks[b]);
    if (next_tap < taps.size() && taps[next_tap] == static_cast<int>(b + 1)) {
      enc.projections.features.push_back(x.bottomRows(np));
      ++next_tap;
    }
  }
  c.final_state = x;
  w.vision.ln_post.forward(x.topRows(1), c.ln_out, c.ln);
  Mat projected;
  w.vision.proj.forward(c.ln_out, projected);
  c.global = nn::l2_normalize(projected.row(0), c.norm);
  enc.global = c.global;
  return enc;
}

void vision_backward(const EncoderWeights& w, const VisionCache& c, const std::vector<int>& taps,
                     const std::vector<Mat>& d_taps, const RowVec& d_global, EncoderWeights& grad) {
  const EncoderConfig& cfg = w.config;
  const int np = cfg.n_patches();
  Mat dx = Mat::Zero(np + 1, cfg.d_model);
  if (d_global.size() > 0) {
    const RowVec dproj = nn::l2_normalize_backward(c.global, c.norm, d_global);
    Mat dln;
    w.vision.proj.backward(c.ln_out, dproj, grad.vision.proj, &dln);
    Mat dcls;
    w.vision.ln_post.backward(dln, c.ln, grad.vision.ln_post, dcls);
    dx.row(0) += dcls.row(0);
  }
  const std::size_t nb = w.vision.blocks.size();
  int tap_slot = static_cast<int>(taps.size()) - 1;
  Mat dprev;
  for (std::size_t b = nb; b-- > 0;) {
    while (tap_slot >= 0 && taps[static_cast<std::size_t>(tap_slot)] == static_cast<int>(b + 1)) {
      const Mat& g = d_taps[static_cast<std::size_t>(tap_slot)];
      if (g.size() > 0) dx.bottomRows(np) += g;
      --tap_slot;
    }
    w.vision.blocks[b].backward(dx, c.blocks[b], grad.vision.blocks[b], dprev);
    dx.swap(dprev);
  }
  grad.vision.pos += dx;
  grad.vision.cls.row(0) += dx.row(0);
  w.vision.patch_embed.backward(c.patches, dx.bottomRows(np), grad.vision.patch_embed, nullptr);
}

ImageEncoding encode_image(const EncoderWeights& w, const Image& image, const std::vector<int>& taps) {
  VisionCache cache;
  return vision_forward(w, image, taps, cache);
}

ImageEncoding encode_image(const EncoderWeights& w, const Image& image) {
  return encode_image(w, image, w.config.taps);
}

// ---- text -----------------------------------------------------------------

RowVec text_forward(const EncoderWeights& w, const std::vector<int>& ids, TextCache& c) {
  const int eos = Tokenizer::eos_position(ids);
  if (eos >= w.text.pos.rows()) throw Error(Errc::shape_mismatch, "token sequence longer than max_text_len");
  c.ids.assign(ids.begin(), ids.begin() + eos + 1);
  const int n = eos + 1;
  Mat x(n, w.config.d_model);
  for (int i = 0; i < n; ++i) {
    const int id = c.ids[static_cast<std::size_t>(i)];
    if (id < 0 || id >= w.text.token_embed.rows()) throw Error(Errc::invalid_argument, "token id out of range");
    x.row(i) = w.text.token_embed.row(id) + w.text.pos.row(i);
  }
  const std::size_t nb = w.text.blocks.size();
  c.inputs.resize(nb);
  c.blocks.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    c.inputs[b] = x;
    w.text.blocks[b].forward(c.inputs[b], x, c.blocks[b]);
  }
  c.final_state = x;
  w.text.ln_final.forward(x, c.ln_out, c.ln);
  if (w.config.pooling == TextPooling::eos) {
    c.pooled = c.ln_out.row(n - 1);
  } else {
    c.pooled = c.ln_out.colwise().mean();
  }
  Mat projected;
  w.text.proj.forward(c.pooled, projected);
  c.embedding = nn::l2_normalize(projected.row(0), c.norm);
  return c.embedding;
}

const Mat& text_hidden(const TextCache& cache) { return cache.ln_out; }

namespace {

void text_backward_from_ln(const EncoderWeights& w, const TextCache& c, const Mat& d_ln, EncoderWeights& grad) {
  Mat dx;
  w.text.ln_final.backward(d_ln, c.ln, grad.text.ln_final, dx);
  Mat dprev;
  for (std::size_t b = w.text.blocks.size(); b-- > 0;) {
    w.text.blocks[b].backward(dx, c.blocks[b], grad.text.blocks[b], dprev);
    dx.swap(dprev);
  }
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    grad.text.token_embed.row(c.ids[i]) += dx.row(r);
    grad.text.pos.row(r) += dx.row(r);
  }
}

}  // namespace

void text_backward(const EncoderWeights& w, const TextCache& c, const RowVec& d_embedding, EncoderWeights& grad) {
  const RowVec dproj = nn::l2_normalize_backward(c.embedding, c.norm, d_embedding);
  Mat dpooled;
  w.text.proj.backward(c.pooled, dproj, grad.text.proj, &dpooled);
  const Eigen::Index n = c.ln_out.rows();
  Mat d_ln = Mat::Zero(n, w.config.d_model);
  if (w.config.pooling == TextPooling::eos) {
    d_ln.row(n - 1) = dpooled.row(0);
  } else {
    d_ln.rowwise() += dpooled.row(0) / static_cast<Real>(n);
  }
  text_backward_from_ln(w, c, d_ln, grad);
}

void text_backward_hidden(const EncoderWeights& w, const TextCache& c, const Mat& d_hidden, EncoderWeights& grad) {
  text_backward_from_ln(w, c, d_hidden, grad);
}

RowVec encode_text(const EncoderWeights& w, const Tokenizer& tok, std::string_view text) {
  TextCache cache;
  return text_forward(w, tok.tokenize(text), cache);
}

}  // namespace groundlab::dualenc
