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

#include "groundlab/dualenc/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "groundlab/core/error.hpp"
#include "groundlab/nn/adam.hpp"
#include "groundlab/nn/parallel.hpp"
#include "groundlab/scenegen/query.hpp"
#include "groundlab/scenegen/render.hpp"

namespace groundlab::dualenc {

namespace {

constexpr Real kMaxLogitScale = 4.605170185988092;  // ln 100

scenegen::Scene corpus_scene(const scenegen::Catalog& catalog, std::uint64_t seed, int index, int image_size,
                             int group_size) {
  const auto& cats = catalog.categories();
  // Pairs of one group share a single colour, so in-batch negatives differ in
  // category, shape, size or position rather than only in colour.
  std::optional<scenegen::Color> group_color;
  if (group_size > 1) {
    Rng grng(derive_seed(seed, 0x67726f7570, static_cast<std::uint64_t>(index / group_size)));
    group_color = scenegen::kAllColors[grng.below(scenegen::kAllColors.size())];
  }
  for (int attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt)));
    std::vector<std::size_t> order(cats.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    scenegen::SceneConfig sc;
    sc.height = sc.width = image_size;
    sc.clutter_level = 1;
    if (group_color) sc.palette = {*group_color};
    const int n = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < n; ++i) sc.categories.push_back(cats[order[static_cast<std::size_t>(i)]].name);
    try {
      return scenegen::generate_scene(sc, rng.next_u64(), catalog, index);
    } catch (const Error& e) {
      if (e.code() != Errc::placement_failed || attempt > 50) throw;
    }
  }
}

struct MlmModel {
  EncoderWeights enc;
  nn::Linear head;

  void collect(nn::ParamList& out, const std::string& prefix) {
    enc.collect(out, prefix + "enc.");
    head.collect(out, prefix + "head.");
  }
};

nn::ParamList text_params(EncoderWeights& w) {
  nn::ParamList out;
  w.text.collect(out, "text.");
  return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch, std::size_t group = 1) {
  group = std::max<std::size_t>(group, 1);
  std::vector<std::size_t> groups((n + group - 1) / group);
  std::iota(groups.begin(), groups.end(), 0);
  Rng rng(derive_seed(seed, 0x5348, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(std::span<std::size_t>(groups));
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t g : groups) {
    for (std::size_t i = g * group; i < std::min(n, (g + 1) * group); ++i) order.push_back(i);
  }
  return order;
}

/// Masked-token training of a fresh text tower. Returns the tower only.
TextTower mlm_pretrain(const EncoderConfig& cfg, const std::vector<std::vector<int>>& token_ids,
                       const PretrainConfig& config) {
  const Tokenizer tok(cfg.vocabulary, cfg.max_text_len);
  MlmModel model{EncoderWeights::init(cfg, derive_seed(config.seed, 0x4d4c4d)), nn::Linear(cfg.d_model, tok.size())};
  Rng init_rng(derive_seed(config.seed, 0x4d4c4d, 1));
  model.head.init(init_rng, 1.0 / std::sqrt(static_cast<Real>(cfg.d_model)));

  nn::ParamList params = text_params(model.enc);
  model.head.collect(params, "head.");
  nn::Adam adam(params, {});
  const int n = static_cast<int>(token_ids.size());
  const int bs = config.batch_size;
  const long steps_per_epoch = (n + bs - 1) / bs;
  const long total = std::max(1L, steps_per_epoch * config.mlm_epochs);
  long step = 0;
  for (int epoch = 0; epoch < config.mlm_epochs; ++epoch) {
    const auto order = epoch_order(static_cast<std::size_t>(n), derive_seed(config.seed, 0x4d4c4d), epoch);
    for (int start = 0; start < n; start += bs) {
      const int count = std::min(bs, n - start);
      MlmModel grad = nn::zeros_like(model);
      nn::accumulate_chunks(count, model, grad, [&](int i, MlmModel& g) {
        const std::size_t idx = order[static_cast<std::size_t>(start + i)];
        std::vector<int> ids = token_ids[idx];
        const int eos = Tokenizer::eos_position(ids);
        Rng rng(derive_seed(config.seed, 0x6d61736b, static_cast<std::uint64_t>(epoch) * 1000003u + idx));
        std::vector<int> masked;
        for (int p = 0; p < eos; ++p) {
          if (rng.bernoulli(config.mask_prob)) masked.push_back(p);
        }
        if (masked.empty() && eos > 0) masked.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(eos))));
        if (masked.empty()) return;
        std::vector<int> targets;
        for (int p : masked) {
          targets.push_back(ids[static_cast<std::size_t>(p)]);
          ids[static_cast<std::size_t>(p)] = Tokenizer::kMask;
        }
        TextCache cache;
        text_forward(model.enc, ids, cache);
        const Mat& hidden = text_hidden(cache);
        Mat rows(static_cast<Eigen::Index>(masked.size()), cfg.d_model);
        for (std::size_t k = 0; k < masked.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = hidden.row(masked[k]);
        Mat logits;
        model.head.forward(rows, logits);
        Mat dlogits = logits;
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
          const Real mx = logits.row(r).maxCoeff();
          dlogits.row(r) = (logits.row(r).array() - mx).exp();
          dlogits.row(r) /= dlogits.row(r).sum();
          dlogits(r, targets[static_cast<std::size_t>(r)]) -= 1.0;
        }
        dlogits /= static_cast<Real>(masked.size() * static_cast<std::size_t>(count));
        Mat drows;
        model.head.backward(rows, dlogits, g.head, &drows);
        Mat dhidden = Mat::Zero(hidden.rows(), hidden.cols());
        for (std::size_t k = 0; k < masked.size(); ++k) dhidden.row(masked[k]) += drows.row(static_cast<Eigen::Index>(k));
        text_backward_hidden(model.enc, cache, dhidden, g.enc);
      });
      nn::ParamList grads = text_params(grad.enc);
      grad.head.collect(grads, "head.");
      adam.step(params, grads, nn::cosine_lr(step, total, config.base_lr, config.min_lr));
      ++step;
    }
  }
  return model.enc.text;
}

}  // namespace

nlohmann::json PretrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"base_lr", base_lr},
          {"min_lr", min_lr},
          {"seed", seed},
          {"holdout", holdout},
          {"group_size", group_size},
          {"initial_temperature", initial_temperature},
          {"mlm_epochs", mlm_epochs},
          {"mask_prob", mask_prob}};
}

std::vector<CaptionPair> build_caption_corpus(const scenegen::Catalog& catalog, int n_pairs, std::uint64_t seed,
                                              int image_size, int group_size) {
  std::vector<CaptionPair> out(static_cast<std::size_t>(std::max(n_pairs, 0)));
  nn::parallel_for(n_pairs, [&](int i) {
    const scenegen::Scene scene = corpus_scene(catalog, seed, i, image_size, group_size);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i), 0xca97));
    auto& pair = out[static_cast<std::size_t>(i)];
    if (scene.objects.size() == 1) {
      pair.caption = scenegen::describe_object(scene, scene.objects.front(), static_cast<int>(rng.below(3)), rng);
    } else {
      // Whole-scene caption, objects left to right, short phrase styles only.
      std::vector<const scenegen::SceneObject*> objs;
      for (const auto& o : scene.objects) objs.push_back(&o);
      std::sort(objs.begin(), objs.end(), [](auto* a, auto* b) { return a->center.x < b->center.x; });
      for (std::size_t k = 0; k < objs.size(); ++k) {
        if (k > 0) pair.caption += " and ";
        pair.caption += scenegen::describe_object(scene, *objs[k], 1 + static_cast<int>(rng.below(2)), rng);
      }
    }
    pair.image = scenegen::render(scene).image;
  });
  return out;
}

double contrastive_loss(const Mat& img, const Mat& txt, Real logit_scale, Mat* d_img, Mat* d_txt,
                        Real* d_logit_scale) {
  const Eigen::Index b = img.rows();
  if (b < 2 || txt.rows() != b) {
    throw Error(Errc::invalid_argument, "contrastive loss needs a batch of at least two matched pairs");
  }
  const Real s = std::exp(logit_scale);
  const Mat sim = img * txt.transpose();
  const Mat logits = s * sim;
  Mat p_row(b, b), p_col(b, b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Real mr = logits.row(i).maxCoeff();
    p_row.row(i) = (logits.row(i).array() - mr).exp();
    const Real zr = p_row.row(i).sum();
    p_row.row(i) /= zr;
    loss += 0.5 * (mr + std::log(zr) - logits(i, i));
    const Real mc = logits.col(i).maxCoeff();
    p_col.col(i) = (logits.col(i).array() - mc).exp();
    const Real zc = p_col.col(i).sum();
    p_col.col(i) /= zc;
    loss += 0.5 * (mc + std::log(zc) - logits(i, i));
  }
  loss /= static_cast<double>(b);
  Mat dlogits = 0.5 * (p_row + p_col);
  dlogits.diagonal().array() -= 1.0;
  dlogits /= static_cast<Real>(b);
  if (d_img != nullptr) *d_img = s * dlogits * txt;
  if (d_txt != nullptr) *d_txt = s * dlogits.transpose() * img;
  if (d_logit_scale != nullptr) *d_logit_scale = (dlogits.array() * logits.array()).sum();
  return loss;
}

double retrieval_top1(const EncoderWeights& w, const Tokenizer& tok, std::span<const CaptionPair> pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n == 0) throw Error(Errc::no_samples, "retrieval needs at least one pair");
  Mat img(n, w.config.d_embed), txt(n, w.config.d_embed);
  nn::parallel_for(n, [&](int i) {
    img.row(i) = encode_image(w, pairs[static_cast<std::size_t>(i)].image, {}).global;
    txt.row(i) = encode_text(w, tok, pairs[static_cast<std::size_t>(i)].caption);
  });
  const Mat sim = txt * img.transpose();
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    sim.row(i).maxCoeff(&best);
    if (best == i) ++hits;
  }
  return static_cast<double>(hits) / n;
}

EncoderWeights contrastive_pretrain(std::span<const CaptionPair> pairs, const EncoderConfig& encoder_config,
                                    const PretrainConfig& config, const PretrainProgress& progress) {
  if (config.batch_size < 2) {
    throw Error(Errc::invalid_argument, "contrastive pretraining needs batch_size >= 2");
  }
  if (config.epochs < 1) throw Error(Errc::invalid_argument, "pretraining needs at least one epoch");
  const int holdout = std::clamp(config.holdout, 0, static_cast<int>(pairs.size()));
  const int n = static_cast<int>(pairs.size()) - holdout;
  if (n < 2) throw Error(Errc::invalid_argument, "contrastive pretraining needs at least two training pairs");

  EncoderWeights w = EncoderWeights::init(encoder_config, config.seed);
  w.logit_scale(0, 0) = std::log(1.0 / config.initial_temperature);
  const Tokenizer tok(encoder_config.vocabulary, encoder_config.max_text_len);
  std::vector<std::vector<int>> ids(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) ids[i] = tok.tokenize(pairs[i].caption);
  const bool train_text = encoder_config.provenance == TextProvenance::joint;

  nn::ParamList params = nn::params_of(w);
  nn::Adam adam(params, {});
  const int bs = config.batch_size;
  const long steps_per_epoch = n / bs + ((n % bs) >= 2 ? 1 : 0);
  const long total = std::max(1L, steps_per_epoch * config.epochs);
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order =
        epoch_order(static_cast<std::size_t>(n), config.seed, epoch, static_cast<std::size_t>(config.group_size));
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += bs) {
      const int count = std::min(bs, n - start);
      if (count < 2) break;
      std::vector<VisionCache> vc(static_cast<std::size_t>(count));
      std::vector<TextCache> tc(static_cast<std::size_t>(count));
      Mat img(count, encoder_config.d_embed), txt(count, encoder_config.d_embed);
      nn::parallel_for(count, [&](int i) {
        const std::size_t idx = order[static_cast<std::size_t>(start + i)];
        img.row(i) = vision_forward(w, pairs[idx].image, {}, vc[static_cast<std::size_t>(i)]).global;
        txt.row(i) = text_forward(w, ids[idx], tc[static_cast<std::size_t>(i)]);
      });
      Mat d_img, d_txt;
      Real d_scale = 0.0;
      const double loss = contrastive_loss(img, txt, w.logit_scale(0, 0), &d_img, &d_txt, &d_scale);
      if (!std::isfinite(loss)) {
        throw Error(Errc::nan_loss, "pretraining epoch " + std::to_string(epoch) + " batch " + std::to_string(batches));
      }
      EncoderWeights grad = nn::zeros_like(w);
      const int work = train_text ? 2 * count : count;
      nn::accumulate_chunks(work, w, grad, [&](int i, EncoderWeights& g) {
        if (i < count) {
          vision_backward(w, vc[static_cast<std::size_t>(i)], {}, {}, d_img.row(i), g);
        } else {
          const int j = i - count;
          text_backward(w, tc[static_cast<std::size_t>(j)], d_txt.row(j), g);
        }
      });
      grad.logit_scale(0, 0) += d_scale;
      adam.step(params, nn::params_of(grad), nn::cosine_lr(step, total, config.base_lr, config.min_lr));
      w.logit_scale(0, 0) = std::min(w.logit_scale(0, 0), kMaxLogitScale);
      ++step;
      epoch_loss += loss;
      ++batches;
    }
    epoch_loss /= std::max(batches, 1);
    w.metrics.epoch_loss.push_back(epoch_loss);
    if (progress) progress(epoch, epoch_loss);
  }

  if (!train_text) {
    std::vector<std::vector<int>> train_ids(ids.begin(), ids.begin() + n);
    w.text = mlm_pretrain(encoder_config, train_ids, config);
  }

  w.metrics.n_pairs = n;
  w.metrics.seed = config.seed;
  if (holdout >= 2) w.metrics.retrieval_top1 = retrieval_top1(w, tok, pairs.subspan(static_cast<std::size_t>(n)));
  w.frozen = false;
  w.fingerprint = w.compute_fingerprint();
  return w;
}

}  // namespace groundlab::dualenc
