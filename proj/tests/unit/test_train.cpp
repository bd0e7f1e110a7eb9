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
#include <set>

#include "checks.hpp"
#include "groundlab/core/error.hpp"
#include "groundlab/decoder/pipeline.hpp"
#include "groundlab/train/train.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::train;

TEST_CASE("pixel_bce closed forms") {
  Rng rng(1);
  const Mask gt = test::random_mask(rng, 8, 8, 0.5);
  std::vector<double> perfect(64);
  for (int i = 0; i < 64; ++i) perfect[i] = gt.bits[i];
  CHECK(pixel_bce(perfect, gt) <= 1e-6);
  std::vector<double> half(64, 0.5);
  CHECK(std::abs(pixel_bce(half, gt) - std::log(2.0)) < 1e-9);
  CHECK_THROWS_AS(pixel_bce(std::vector<double>(10, 0.5), gt), Error);
}

TEST_CASE("pixel_bce matches a naive double loop") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Mask gt = test::random_mask(rng, 8, 8, rng.uniform());
    std::vector<double> p(64);
    for (auto& v : p) v = rng.uniform();
    double sum = 0.0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const double q = std::min(std::max(p[y * 8 + x], kBceEps), 1.0 - kBceEps);
        sum += gt.at(y, x) ? -std::log(q) : -std::log(1.0 - q);
      }
    }
    CHECK(std::abs(pixel_bce(p, gt) - sum / 64.0) < 1e-10);
  }
}

TEST_CASE("pixel_bce gradient matches finite differences and vanishes under the clamp") {
  CHECK(checks::pixel_bce_gradcheck(3) < 1e-6);
  Mask gt(1, 2);
  gt.bits = {1, 0};
  const std::vector<double> clamped{0.0, 1.0};
  const auto g = pixel_bce_grad(clamped, gt);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("cosine schedule endpoints") {
  TrainConfig c;
  c.base_lr = 1e-3;
  c.min_lr = 1e-5;
  CHECK(lr_at_step(0, 100, c) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(lr_at_step(100, 100, c) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(lr_at_step(50, 100, c) == doctest::Approx((1e-3 + 1e-5) / 2).epsilon(1e-12));
  double prev = 1.0;
  for (int s = 0; s <= 100; ++s) {
    const double lr = lr_at_step(s, 100, c);
    CHECK(lr <= prev);
    prev = lr;
  }
  CHECK_THROWS_AS(lr_at_step(101, 100, c), Error);
  CHECK_THROWS_AS(lr_at_step(-1, 100, c), Error);
}

TEST_CASE("train config validation and json") {
  TrainConfig c;
  c.validate();
  CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
  auto bad = c;
  bad.min_lr = bad.base_lr;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("validation split is a deterministic partition") {
  const auto a = validation_split(100, 0.1, 5);
  const auto b = validation_split(100, 0.1, 5);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.val.size() == 10);
  std::set<int> all(a.train.begin(), a.train.end());
  for (int v : a.val) CHECK(all.insert(v).second);
  CHECK(all.size() == 100);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));
  CHECK(validation_split(100, 0.1, 6).val != a.val);
}

TEST_CASE("decoder training learns, keeps the encoder frozen and is reproducible") {
  const auto data = checks::small_dataset(100);
  const auto enc = dualenc::freeze(dualenc::EncoderWeights::init(test::small_encoder_config(), 2));
  const auto dcfg = decoder::config_for(enc.config, 16, decoder::FusionVariant::hierarchical_film);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  const auto a = train_decoder(enc, decoder::build_variant(dcfg, 1), data.train, tc);
  const auto b = train_decoder(enc, decoder::build_variant(dcfg, 1), data.train, tc);
  REQUIRE(a.report.train_loss.size() == 2);
  CHECK(a.report.train_loss.back() < a.report.initial_loss);
  CHECK(a.report.train_loss == b.report.train_loss);
  CHECK(a.report.val_iou == b.report.val_iou);
  CHECK(a.decoder.fingerprint() == b.decoder.fingerprint());
  CHECK(a.report.encoder_fingerprint_before == a.report.encoder_fingerprint_after);
  CHECK(a.report.trainable_params == a.report.decoder_params);
  CHECK(a.report.trainable_fraction ==
        doctest::Approx(static_cast<double>(a.report.decoder_params) /
                        static_cast<double>(a.report.decoder_params + a.report.encoder_params)));
  CHECK(a.report.n_train + a.report.n_val == 100);
  CHECK(a.report.to_json() == b.report.to_json());
  const auto back = TrainReport::from_json(a.report.to_json());
  CHECK(back.to_json() == a.report.to_json());
  CHECK(a.report.to_json().dump().find("wall") == std::string::npos);
}

TEST_CASE("decoder training refuses an unfrozen encoder") {
  const auto data = checks::small_dataset(20);
  const auto enc = dualenc::EncoderWeights::init(test::small_encoder_config(), 2);
  TrainConfig tc;
  tc.epochs = 1;
  CHECK_THROWS_AS(train_decoder(enc, decoder::build_variant(decoder::config_for(enc.config, 16,
                                                                                decoder::FusionVariant::hierarchical_film),
                                                            1),
                                data.train, tc),
                  Error);
  CHECK_THROWS_AS(train_decoder(dualenc::freeze(enc),
                                decoder::build_variant(decoder::config_for(enc.config, 16,
                                                                           decoder::FusionVariant::hierarchical_film),
                                                       1),
                                {}, tc),
                  Error);
}

TEST_CASE("frozen invariant holds every epoch and breaks under full finetune") {
  const auto r = checks::frozen_invariant();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("full finetune accounting") {
  const auto data = checks::small_dataset(40);
  const auto enc = dualenc::freeze(dualenc::EncoderWeights::init(test::small_encoder_config(), 3));
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 8;
  tc.freeze_encoder = false;
  tc.variant_tag = "hierarchical_film+full_finetune";
  const auto r = train_full_finetune(
      enc, decoder::build_variant(decoder::config_for(enc.config, 16, decoder::FusionVariant::hierarchical_film), 1),
      data.train, tc);
  CHECK(r.report.trainable_params == r.report.encoder_params + r.report.decoder_params);
  CHECK(r.report.trainable_fraction == doctest::Approx(1.0));
  CHECK(!r.report.freeze_encoder);
  CHECK(r.report.to_json().at("mode") == "full_finetune");
  CHECK(r.encoder.fingerprint == r.encoder.compute_fingerprint());
  tc.freeze_encoder = true;
  CHECK_THROWS_AS(train_full_finetune(enc,
                                      decoder::build_variant(decoder::config_for(enc.config, 16,
                                                                                 decoder::FusionVariant::hierarchical_film),
                                                             1),
                                      data.train, tc),
                  Error);
}

TEST_CASE("divergent learning rate reports nan-loss") {
  const auto data = checks::small_dataset(20);
  const auto enc = dualenc::freeze(dualenc::EncoderWeights::init(test::small_encoder_config(), 4));
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;
  tc.base_lr = 1e30;
  tc.min_lr = 1e29;
  try {
    train_decoder(enc, decoder::build_variant(decoder::config_for(enc.config, 16,
                                                                  decoder::FusionVariant::hierarchical_film),
                                              1),
                  data.train, tc);
    MESSAGE("training survived a huge learning rate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nan_loss);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}
