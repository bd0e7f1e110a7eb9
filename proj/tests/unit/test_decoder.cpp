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

#include "checks.hpp"
#include "groundlab/core/error.hpp"
#include "groundlab/decoder/decoder.hpp"
#include "groundlab/decoder/pipeline.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::decoder;

TEST_CASE("FiLM examples and fusion recurrence") {
  const auto r = checks::film_and_recurrence();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("film_modulate rejects mismatched widths") {
  RowVec a = RowVec::Ones(3), b = RowVec::Zero(3);
  CHECK_THROWS_AS(film_modulate(a, b, Mat::Zero(2, 4)), Error);
}

TEST_CASE("stage one is alpha times P1 plus beta") {
  Rng rng(2);
  auto cfg = checks::tiny_decoder_config(FusionVariant::hierarchical_film);
  auto dec = build_variant(cfg, 1);
  checks::jitter(nn::params_of(dec), rng, 0.3);
  const RowVec q = test::random_mat(rng, 1, cfg.embed_dim);
  std::vector<Mat> proj{test::random_mat(rng, 4, cfg.encoder_width), test::random_mat(rng, 4, cfg.encoder_width)};
  DecoderTrace t;
  decode_hierarchical(dec, proj, q, nullptr, &t);
  CHECK(t.carried[0].isZero(0.0));
  Mat p1;
  dec.reduce[0].forward(proj[0], p1);
  CHECK((film_modulate(dec.film[0], q, p1) - t.states[0]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("analytic gradients match central differences") {
  const auto r = checks::gradients();
  INFO(r.detail);
  CHECK(r.pass);
  MESSAGE(r.detail);
}

TEST_CASE("mask head produces per-pixel distributions") {
  Rng rng(3);
  DecoderConfig cfg;
  auto dec = build_variant(cfg, 5);
  const Mat tokens = test::random_mat(rng, 64, cfg.width);
  const auto pm = mask_head(dec.head, tokens, 128, 128);
  CHECK(pm.height == 128);
  CHECK(pm.width == 128);
  REQUIRE(pm.logits.rows() == 128 * 128);
  REQUIRE(pm.prob.size() == 128u * 128u);
  std::vector<double> prob;
  Mat g;
  Mask dummy(128, 128);
  kernels::serial::softmax_bce(pm.logits, dummy.bits, 0.0, prob, g);
  Mat shifted = pm.logits.array() + 3.7;
  std::vector<double> prob2;
  kernels::serial::softmax_bce(shifted, dummy.bits, 0.0, prob2, g);
  for (int i = 0; i < pm.logits.rows(); ++i) {
    const double m = pm.logits.row(i).maxCoeff();
    const double e0 = std::exp(pm.logits(i, 0) - m), e1 = std::exp(pm.logits(i, 1) - m);
    CHECK(std::abs(e0 / (e0 + e1) + e1 / (e0 + e1) - 1.0) < 1e-6);
    CHECK(pm.prob[i] == doctest::Approx(prob[i]).epsilon(1e-12));
    CHECK(std::abs(prob2[i] - prob[i]) < 1e-12);
    CHECK(pm.binary.bits[i] == (pm.prob[i] > 0.5 ? 1 : 0));
  }
  CHECK_THROWS_AS(mask_head(dec.head, test::random_mat(rng, 60, cfg.width), 128, 128), Error);
}

TEST_CASE("untrained prediction is valid and deterministic") {
  const auto enc = dualenc::freeze(dualenc::EncoderWeights::init(test::small_encoder_config(), 1));
  const auto dec = build_variant(config_for(enc.config, 16, FusionVariant::hierarchical_film), 2);
  dualenc::Tokenizer tok(enc.config.vocabulary, enc.config.max_text_len);
  Image im(128, 128);
  Rng rng(4);
  for (auto& v : im.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  const auto a = predict_mask(im, "grab the red apple", enc, tok, dec);
  const auto b = predict_mask(im, "grab the red apple", enc, tok, dec);
  CHECK(a.binary == b.binary);
  CHECK(a.binary.height == 128);
  for (double p : a.prob) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("parameter economy at the base preset") {
  auto ec = dualenc::EncoderConfig::preset(dualenc::BackendSize::base);
  ec.vocabulary = scenegen::grammar_vocabulary(scenegen::Catalog::standard());
  const auto enc = dualenc::EncoderWeights::init(ec, 1);
  const auto hier = build_variant(config_for(ec, 64, FusionVariant::hierarchical_film), 1);
  const auto cross = build_variant(config_for(ec, 64, FusionVariant::cross_attention), 1);
  const auto single = build_variant(config_for(ec, 64, FusionVariant::single_film), 1);
  const double share = static_cast<double>(hier.parameter_count()) /
                       static_cast<double>(hier.parameter_count() + enc.parameter_count());
  MESSAGE("hierarchical share " << share << ", decoder " << hier.parameter_count() << ", encoder "
                                << enc.parameter_count());
  CHECK(share < 0.15);
  CHECK(cross.parameter_count() > hier.parameter_count());
  CHECK(single.parameter_count() < hier.parameter_count());
  CHECK(hier.film.size() == 5);
  CHECK(single.film.size() == 1);
  CHECK(cross.film.empty());
  CHECK(cross.cross.size() == 5);
  CHECK(hier.blocks.size() == 4);
}

TEST_CASE("single FiLM differs from hierarchical once later stages modulate") {
  Rng rng(6);
  auto hcfg = checks::tiny_decoder_config(FusionVariant::hierarchical_film);
  auto scfg = checks::tiny_decoder_config(FusionVariant::single_film);
  auto h = build_variant(hcfg, 9);
  auto s = build_variant(scfg, 9);
  // Share everything but the FiLM layers.
  s.reduce = h.reduce;
  s.blocks = h.blocks;
  s.head = h.head;
  s.film[0] = h.film[0];
  const RowVec q = test::random_mat(rng, 1, hcfg.embed_dim);
  std::vector<Mat> proj{test::random_mat(rng, 4, 6), test::random_mat(rng, 4, 6)};
  CHECK((decode_hierarchical(h, proj, q) - decode_hierarchical(s, proj, q)).cwiseAbs().maxCoeff() == 0.0);
  checks::jitter(nn::params_of(h.film[1]), rng, 0.5);
  CHECK((decode_hierarchical(h, proj, q) - decode_hierarchical(s, proj, q)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("tap order changes consumption order") {
  Rng rng(7);
  auto a = checks::tiny_decoder_config(FusionVariant::hierarchical_film);
  auto b = a;
  b.tap_order = TapOrder::descending;
  auto da = build_variant(a, 3);
  auto db = build_variant(b, 3);
  checks::jitter(nn::params_of(da), rng, 0.3);
  auto pa = nn::params_of(da), pb = nn::params_of(db);
  for (std::size_t i = 0; i < pa.size(); ++i) *pb[i].value = *pa[i].value;
  const RowVec q = test::random_mat(rng, 1, a.embed_dim);
  std::vector<Mat> proj{test::random_mat(rng, 4, 6), test::random_mat(rng, 4, 6)};
  CHECK((decode_hierarchical(da, proj, q) - decode_hierarchical(db, proj, q)).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("decoder config checks") {
  auto c = checks::tiny_decoder_config(FusionVariant::hierarchical_film);
  c.taps = {1};
  CHECK_THROWS_AS(c.validate(), Error);
  c = checks::tiny_decoder_config(FusionVariant::hierarchical_film);
  c.width = 7;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(parse_variant("film_everywhere"), Error);
  CHECK(parse_variant("cross_attention") == FusionVariant::cross_attention);
  const auto good = checks::tiny_decoder_config(FusionVariant::cross_attention);
  CHECK(DecoderConfig::from_json(good.to_json()) == good);
  CHECK(good.image_size() == 8);
}

TEST_CASE("decoder checkpoint binds to the encoder fingerprint") {
  const auto dec = build_variant(checks::tiny_decoder_config(FusionVariant::hierarchical_film), 4);
  const auto dir = test::scratch_dir("dec_ckpt");
  save_decoder(dir / "d.glck", dec, "abc", {{"note", 1}});
  const auto back = load_decoder(dir / "d.glck", "abc");
  CHECK(back.decoder.fingerprint() == dec.fingerprint());
  CHECK(back.decoder.config == dec.config);
  CHECK(back.extra["note"] == 1);
  try {
    load_decoder(dir / "d.glck", "other");
    FAIL("expected fingerprint-mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::fingerprint_mismatch);
  }
}
