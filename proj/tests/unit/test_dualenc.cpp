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

#include <doctest.h>

#include <cmath>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/dualenc/checkpoint.hpp"
#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/dualenc/pretrain.hpp"
#include "groundlab/nn/params.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::dualenc;

namespace {

std::vector<std::string> vocab() { return scenegen::grammar_vocabulary(scenegen::Catalog::standard()); }

Image noise_image(int side, std::uint64_t seed) {
  Rng r(seed);
  Image im(side, side);
  for (auto& v : im.rgb) v = static_cast<std::uint8_t>(r.below(256));
  return im;
}

}  // namespace

TEST_CASE("tokenizer handles known, empty and unknown text") {
  Tokenizer tok(vocab(), 16);
  const auto ids = tok.tokenize("grab the red apple");
  REQUIRE(ids.size() == 16);
  for (int i = 0; i < 4; ++i) CHECK(ids[i] >= Tokenizer::kSpecials);
  CHECK(ids[4] == Tokenizer::kEos);
  for (int i = 5; i < 16; ++i) CHECK(ids[i] == Tokenizer::kPad);
  CHECK(Tokenizer::eos_position(ids) == 4);

  const auto empty = tok.tokenize("");
  CHECK(empty[0] == Tokenizer::kEos);
  for (int i = 1; i < 16; ++i) CHECK(empty[i] == Tokenizer::kPad);

  const auto oov = tok.tokenize("grab the zorp");
  CHECK(oov[2] == Tokenizer::kUnk);
  CHECK(oov[3] == Tokenizer::kEos);

  CHECK(tok.tokenize("Grab the RED apple!") == ids);
  const auto longer = tok.tokenize("the the the the the the the the the the the the the the the the the the");
  CHECK(Tokenizer::eos_position(longer) == 15);
}

TEST_CASE("text embeddings are unit length and deterministic") {
  const auto w = EncoderWeights::init(test::small_encoder_config(), 1);
  Tokenizer tok(w.config.vocabulary, w.config.max_text_len);
  for (const char* t : {"grab the red apple", "", "the blue box on the left", "zorp"}) {
    const auto q = encode_text(w, tok, t);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(q == encode_text(w, tok, t));
  }
}

TEST_CASE("image encoding shapes at the base preset") {
  auto cfg = EncoderConfig::preset(BackendSize::base);
  cfg.vocabulary = vocab();
  const auto w = EncoderWeights::init(cfg, 2);
  const auto e = encode_image(w, noise_image(128, 1));
  REQUIRE(e.projections.features.size() == 5);
  CHECK(e.projections.taps == std::vector<int>{1, 3, 5, 7, 9});
  for (const auto& f : e.projections.features) {
    CHECK(f.rows() == 64);
    CHECK(f.cols() == cfg.d_model);
  }
  CHECK(e.global.norm() == doctest::Approx(1.0).epsilon(1e-5));
  const auto e2 = encode_image(w, noise_image(128, 2));
  CHECK(e.projections.features[0] != e2.projections.features[0]);
  CHECK_THROWS_AS(encode_image(w, noise_image(64, 1)), Error);
}

TEST_CASE("encoder config validation") {
  auto c = test::small_encoder_config();
  c.taps = {3, 1};
  CHECK_THROWS_AS(c.validate(), Error);
  c.taps = {1};
  CHECK_THROWS_AS(c.validate(), Error);
  c = test::small_encoder_config();
  c.patch_size = 15;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(EncoderConfig::from_json(test::small_encoder_config().to_json()) == test::small_encoder_config());
}

TEST_CASE("vision and text backward match finite differences") {
  auto cfg = test::small_encoder_config();
  auto w = EncoderWeights::init(cfg, 3);
  Rng r(5);
  for (auto& p : nn::params_of(w)) {
    for (Eigen::Index i = 0; i < p.value->size(); ++i) p.value->data()[i] += 0.1 * r.normal();
  }
  const auto im = noise_image(128, 4);
  Tokenizer tok(cfg.vocabulary, cfg.max_text_len);
  auto ids = tok.tokenize("grab the red apple");
  ids.resize(static_cast<std::size_t>(Tokenizer::eos_position(ids) + 1));
  const RowVec gv = test::random_mat(r, 1, cfg.d_embed);
  const RowVec gq = test::random_mat(r, 1, cfg.d_embed);
  const Mat g0 = test::random_mat(r, 64, cfg.d_model), g1 = test::random_mat(r, 64, cfg.d_model);
  auto loss = [&](const EncoderWeights& ww) {
    VisionCache c;
    const auto e = vision_forward(ww, im, cfg.taps, c);
    TextCache t;
    const RowVec q = text_forward(ww, ids, t);
    return e.global.dot(gv) + (e.projections.features[0].array() * g0.array()).sum() +
           (e.projections.features[1].array() * g1.array()).sum() + q.dot(gq);
  };
  VisionCache c;
  vision_forward(w, im, cfg.taps, c);
  TextCache t;
  text_forward(w, ids, t);
  auto g = nn::zeros_like(w);
  vision_backward(w, c, cfg.taps, {g0, g1}, gv, g);
  text_backward(w, t, gq, g);
  auto P = nn::params_of(w);
  const auto G = nn::params_of(g);
  double worst = 0.0;
  for (std::size_t k = 0; k < P.size(); ++k) {
    if (P[k].name.find("logit_scale") != std::string::npos) continue;
    const Eigen::Index n = P[k].value->size();
    for (Eigen::Index i = 0; i < n; i += std::max<Eigen::Index>(1, n / 7)) {
      double& x = P[k].value->data()[i];
      const double o = x, h = 1e-5;
      x = o + h;
      const double a = loss(w);
      x = o - h;
      const double b = loss(w);
      x = o;
      const double e = test::rel_err(G[k].value->data()[i], (a - b) / (2 * h), 1e-6);
      worst = std::max(worst, e);
      if (e > 1e-4) MESSAGE(P[k].name << "[" << i << "] rel " << e);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("contrastive loss: uniform logits give ln B and gradients match finite differences") {
  Rng r(6);
  const int B = 6, d = 5;
  Mat same = Mat::Zero(B, d);
  same.col(0).setOnes();
  CHECK(contrastive_loss(same, same, 0.0, nullptr, nullptr, nullptr) ==
        doctest::Approx(std::log(static_cast<double>(B))).epsilon(1e-12));

  Mat I = test::random_mat(r, B, d), T = test::random_mat(r, B, d);
  for (int i = 0; i < B; ++i) {
    I.row(i).normalize();
    T.row(i).normalize();
  }
  Real s = 1.3;
  Mat dI, dT;
  Real ds = 0;
  contrastive_loss(I, T, s, &dI, &dT, &ds);
  const double h = 1e-6;
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < d; ++j) {
      Mat Ip = I, Im = I;
      Ip(i, j) += h;
      Im(i, j) -= h;
      const double fd = (contrastive_loss(Ip, T, s, nullptr, nullptr, nullptr) -
                         contrastive_loss(Im, T, s, nullptr, nullptr, nullptr)) / (2 * h);
      CHECK(test::rel_err(dI(i, j), fd) < 1e-5);
      Mat Tp = T, Tm = T;
      Tp(i, j) += h;
      Tm(i, j) -= h;
      const double fdt = (contrastive_loss(I, Tp, s, nullptr, nullptr, nullptr) -
                          contrastive_loss(I, Tm, s, nullptr, nullptr, nullptr)) / (2 * h);
      CHECK(test::rel_err(dT(i, j), fdt) < 1e-5);
    }
  }
  const double fds = (contrastive_loss(I, T, s + h, nullptr, nullptr, nullptr) -
                      contrastive_loss(I, T, s - h, nullptr, nullptr, nullptr)) / (2 * h);
  CHECK(test::rel_err(ds, fds) < 1e-5);
  CHECK_THROWS_AS(contrastive_loss(I.topRows(1), T.topRows(1), s, nullptr, nullptr, nullptr), Error);
}

TEST_CASE("freshly initialised encoder starts near ln B at unit temperature") {
  const auto cfg = test::small_encoder_config();
  const auto w = EncoderWeights::init(cfg, 8);
  const auto pairs = build_caption_corpus(scenegen::Catalog::standard(), 16, 3);
  Tokenizer tok(cfg.vocabulary, cfg.max_text_len);
  Mat I(16, cfg.d_embed), T(16, cfg.d_embed);
  for (int i = 0; i < 16; ++i) {
    I.row(i) = encode_image(w, pairs[i].image).global;
    T.row(i) = encode_text(w, tok, pairs[i].caption);
  }
  const double l = contrastive_loss(I, T, 0.0, nullptr, nullptr, nullptr);
  CHECK(std::abs(l - std::log(16.0)) < 0.1);
}

TEST_CASE("caption corpus is deterministic and grouped by colour") {
  const auto cat = scenegen::Catalog::standard();
  const auto a = build_caption_corpus(cat, 12, 5);
  const auto b = build_caption_corpus(cat, 12, 5);
  REQUIRE(a.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(a[i].caption == b[i].caption);
    CHECK(a[i].image.rgb == b[i].image.rgb);
    CHECK(!a[i].caption.empty());
  }
}

TEST_CASE("short pretraining learns something and shuffled captions stay near chance") {
  auto cfg = test::small_encoder_config();
  const auto cat = scenegen::Catalog::standard();
  auto pairs = build_caption_corpus(cat, 480, 11);
  PretrainConfig pc;
  pc.epochs = 10;
  pc.holdout = 32;
  pc.batch_size = 16;
  pc.mlm_epochs = 1;
  std::vector<double> losses;
  auto w = contrastive_pretrain(pairs, cfg, pc, [&](int, double l) { losses.push_back(l); });
  REQUIRE(losses.size() == 10);
  CHECK(losses.back() < losses.front());
  CHECK(!w.frozen);
  CHECK(w.fingerprint == w.compute_fingerprint());
  CHECK(w.metrics.epoch_loss == losses);

  Tokenizer tok(cfg.vocabulary, cfg.max_text_len);
  std::vector<CaptionPair> held(pairs.end() - 32, pairs.end());
  const double real = retrieval_top1(w, tok, held);
  std::vector<CaptionPair> shuffled = held;
  for (int i = 0; i < 32; ++i) shuffled[i].caption = held[(i * 7 + 3) % 32].caption;
  const double chance = retrieval_top1(w, tok, shuffled);
  CHECK(chance <= 0.2);
  CHECK(real > chance);
}

TEST_CASE("freeze is idempotent and fingerprints track weights") {
  auto w = EncoderWeights::init(test::small_encoder_config(), 4);
  const auto f = freeze(w);
  CHECK(f.frozen);
  CHECK(f.fingerprint == f.compute_fingerprint());
  const auto ff = freeze(f);
  CHECK(ff.fingerprint == f.fingerprint);
  CHECK(ff.frozen);
  auto changed = f;
  changed.vision.proj.weight(0, 0) += 1e-9;
  CHECK(changed.compute_fingerprint() != f.fingerprint);
}

TEST_CASE("encoder checkpoint round trip and tamper detection") {
  const auto w = freeze(EncoderWeights::init(test::small_encoder_config(), 5));
  const auto dir = test::scratch_dir("enc_ckpt");
  save_encoder(dir / "e.glck", w);
  const auto back = load_encoder(dir / "e.glck");
  CHECK(back.fingerprint == w.fingerprint);
  CHECK(back.frozen);
  CHECK(back.config == w.config);
  CHECK(back.compute_fingerprint() == w.compute_fingerprint());

  auto bytes = read_bytes(dir / "e.glck");
  bytes[bytes.size() - 9] ^= 0x40;
  write_bytes(dir / "bad.glck", bytes);
  CHECK_THROWS_AS(load_encoder(dir / "bad.glck"), Error);
}
