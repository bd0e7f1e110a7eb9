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

#include "groundlab/train/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "groundlab/core/error.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/kernels/kernels.hpp"
#include "groundlab/nn/parallel.hpp"

namespace groundlab::train {

namespace {

struct JointModel {
  dualenc::EncoderWeights enc;
  decoder::Decoder dec;

  void collect(nn::ParamList& out, const std::string& prefix) {
    enc.collect(out, prefix + "encoder.");
    dec.collect(out, prefix + "decoder.");
  }
};

std::string nan_detail(int epoch, int batch, double lr) {
  std::ostringstream os;
  os << "non-finite loss at epoch " << epoch << ", batch " << batch << ", lr " << lr;
  return os.str();
}

/// Shared epoch/batch driver. `step_fn(indices, batch_no)` runs one optimiser
/// step over the given sample indices and returns the batch mean loss;
/// `validate_fn()` returns the validation IoU; `after_epoch()` runs invariant checks.
template <typename StepFn, typename ValFn, typename AfterFn>
void run_epochs(const TrainConfig& config, const SplitIndices& split, TrainReport& report, StepFn&& step_fn,
                ValFn&& validate_fn, AfterFn&& after_epoch, const TrainProgress& progress) {
  const int n = static_cast<int>(split.train.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order = split.train;
    Rng rng(derive_seed(config.seed, 0x65706f6368, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<int>(order));
    double total = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      const std::span<const int> idx(order.data() + start, static_cast<std::size_t>(count));
      const double loss = step_fn(idx, epoch, batches);
      if (epoch == 0 && batches == 0) report.initial_loss = loss;
      total += loss;
      ++batches;
    }
    report.train_loss.push_back(total / std::max(batches, 1));
    report.val_iou.push_back(validate_fn());
    after_epoch(epoch);
    if (progress) progress(epoch, report.train_loss.back(), report.val_iou.back());
  }
}

double sample_loss(const decoder::PredictionMask& pm, const Mask& gt, double scale, Mat& dlogits) {
  std::vector<double> prob;
  const double loss = kernels::omp::softmax_bce(pm.logits, gt.bits, kBceEps, prob, dlogits);
  dlogits *= scale;
  return loss;
}

void fill_common(TrainReport& r, const TrainConfig& config, const dualenc::EncoderWeights& enc,
                 const decoder::Decoder& dec, const SplitIndices& split) {
  r.variant_tag = config.variant_tag;
  r.freeze_encoder = config.freeze_encoder;
  r.config = config.to_json();
  r.encoder_params = enc.parameter_count();
  r.decoder_params = dec.parameter_count();
  r.trainable_params = config.freeze_encoder ? r.decoder_params : r.encoder_params + r.decoder_params;
  r.trainable_fraction =
      static_cast<double>(r.trainable_params) / static_cast<double>(r.encoder_params + r.decoder_params);
  r.n_train = static_cast<int>(split.train.size());
  r.n_val = static_cast<int>(split.val.size());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_samples(std::span<const scenegen::LabeledSample> samples, const decoder::Decoder& dec) {
  if (samples.empty()) throw Error(Errc::no_samples, "training split is empty");
  const int side = dec.config.image_size();
  for (const auto& s : samples) {
    if (s.gt_mask.height != side || s.gt_mask.width != side) {
      throw Error(Errc::shape_mismatch, "sample " + std::to_string(s.sample_id) + " does not match decoder output size");
    }
  }
}

}  // namespace

// ---- config ---------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::invalid_argument, "epochs must be at least 1");
  if (batch_size < 1) throw Error(Errc::invalid_argument, "batch_size must be at least 1");
  if (!(base_lr > min_lr && min_lr >= 0.0)) throw Error(Errc::invalid_argument, "need base_lr > min_lr >= 0");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw Error(Errc::invalid_argument, "val_fraction must lie in [0, 1)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"base_lr", base_lr},
          {"min_lr", min_lr},
          {"adam", {{"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}, {"weight_decay", adam.weight_decay}}},
          {"schedule", "cosine"},
          {"seed", seed},
          {"freeze_encoder", freeze_encoder},
          {"variant_tag", variant_tag},
          {"val_fraction", val_fraction}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.base_lr = j.at("base_lr").get<double>();
  c.min_lr = j.at("min_lr").get<double>();
  const auto& a = j.at("adam");
  c.adam.beta1 = a.at("beta1").get<double>();
  c.adam.beta2 = a.at("beta2").get<double>();
  c.adam.eps = a.at("eps").get<double>();
  c.adam.weight_decay = a.at("weight_decay").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.freeze_encoder = j.at("freeze_encoder").get<bool>();
  c.variant_tag = j.at("variant_tag").get<std::string>();
  c.val_fraction = j.at("val_fraction").get<double>();
  return c;
}

// ---- loss and schedule ----------------------------------------------------

double pixel_bce(std::span<const double> prob, const Mask& gt, double eps) {
  if (prob.size() != gt.bits.size()) throw Error(Errc::shape_mismatch, "pixel_bce: probability map and mask differ");
  if (prob.empty()) throw Error(Errc::no_samples, "pixel_bce: empty mask");
  double total = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = std::clamp(prob[i], eps, 1.0 - eps);
    total += gt.bits[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(prob.size());
}

std::vector<double> pixel_bce_grad(std::span<const double> prob, const Mask& gt, double eps) {
  if (prob.size() != gt.bits.size()) throw Error(Errc::shape_mismatch, "pixel_bce: probability map and mask differ");
  const double inv_n = 1.0 / static_cast<double>(prob.size());
  std::vector<double> out(prob.size(), 0.0);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = prob[i];
    if (p < eps || p > 1.0 - eps) continue;
    out[i] = (gt.bits[i] ? -1.0 / p : 1.0 / (1.0 - p)) * inv_n;
  }
  return out;
}

double lr_at_step(long step, long total_steps, const TrainConfig& config) {
  return nn::cosine_lr(step, total_steps, config.base_lr, config.min_lr);
}

// ---- report ---------------------------------------------------------------

nlohmann::json TrainReport::to_json() const {
  return {{"variant_tag", variant_tag},
          {"freeze_encoder", freeze_encoder},
          {"mode", freeze_encoder ? "frozen_encoder" : "full_finetune"},
          {"train_loss", train_loss},
          {"val_iou", val_iou},
          {"initial_loss", initial_loss},
          {"checkpoint_path", checkpoint_path},
          {"encoder_fingerprint_before", encoder_fingerprint_before},
          {"encoder_fingerprint_after", encoder_fingerprint_after},
          {"decoder_fingerprint", decoder_fingerprint},
          {"dataset_hash", dataset_hash},
          {"encoder_params", encoder_params},
          {"decoder_params", decoder_params},
          {"trainable_params", trainable_params},
          {"trainable_fraction", trainable_fraction},
          {"n_train", n_train},
          {"n_val", n_val},
          {"config", config}};
}

TrainReport TrainReport::from_json(const nlohmann::json& j) {
  TrainReport r;
  r.variant_tag = j.at("variant_tag").get<std::string>();
  r.freeze_encoder = j.at("freeze_encoder").get<bool>();
  r.train_loss = j.at("train_loss").get<std::vector<double>>();
  r.val_iou = j.at("val_iou").get<std::vector<double>>();
  r.initial_loss = j.at("initial_loss").get<double>();
  r.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  r.encoder_fingerprint_before = j.at("encoder_fingerprint_before").get<std::string>();
  r.encoder_fingerprint_after = j.at("encoder_fingerprint_after").get<std::string>();
  r.decoder_fingerprint = j.at("decoder_fingerprint").get<std::string>();
  r.dataset_hash = j.at("dataset_hash").get<std::string>();
  r.encoder_params = j.at("encoder_params").get<std::size_t>();
  r.decoder_params = j.at("decoder_params").get<std::size_t>();
  r.trainable_params = j.at("trainable_params").get<std::size_t>();
  r.trainable_fraction = j.at("trainable_fraction").get<double>();
  r.n_train = j.at("n_train").get<int>();
  r.n_val = j.at("n_val").get<int>();
  r.config = j.at("config");
  return r;
}

SplitIndices validation_split(int n, double val_fraction, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x76616c));
  rng.shuffle(std::span<int>(order));
  int n_val = static_cast<int>(std::floor(val_fraction * n));
  if (n - n_val < 1) n_val = n - 1;
  SplitIndices s;
  s.val.assign(order.begin(), order.begin() + std::max(n_val, 0));
  s.train.assign(order.begin() + std::max(n_val, 0), order.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// ---- frozen-encoder training ---------------------------------------------

TrainResult train_decoder(const dualenc::EncoderWeights& encoder, decoder::Decoder dec,
                          std::span<const scenegen::LabeledSample> samples, const TrainConfig& config,
                          const TrainProgress& progress) {
  config.validate();
  if (!config.freeze_encoder) throw Error(Errc::invalid_argument, "train_decoder requires freeze_encoder = true");
  if (!encoder.frozen) throw Error(Errc::invalid_argument, "train_decoder requires a frozen encoder");
  check_samples(samples, dec);
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  TrainReport& report = result.report;
  const SplitIndices split = validation_split(static_cast<int>(samples.size()), config.val_fraction, config.seed);
  fill_common(report, config, encoder, dec, split);
  report.encoder_fingerprint_before = encoder.compute_fingerprint();
  if (report.encoder_fingerprint_before != encoder.fingerprint) {
    throw Error(Errc::fingerprint_mismatch, "encoder differs from its recorded freeze fingerprint");
  }

  // Frozen features are computed once.
  const dualenc::Tokenizer tok(encoder.config.vocabulary, encoder.config.max_text_len);
  const int n = static_cast<int>(samples.size());
  std::vector<std::vector<Mat>> feats(static_cast<std::size_t>(n));
  std::vector<RowVec> queries(static_cast<std::size_t>(n));
  nn::parallel_for(n, [&](int i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    feats[static_cast<std::size_t>(i)] = dualenc::encode_image(encoder, s.image, dec.config.taps).projections.features;
    queries[static_cast<std::size_t>(i)] = dualenc::encode_text(encoder, tok, s.query.text);
  });

  nn::ParamList params = nn::params_of(dec);
  nn::Adam adam(params, config.adam);
  const long steps_per_epoch = (static_cast<long>(split.train.size()) + config.batch_size - 1) / config.batch_size;
  const long total_steps = steps_per_epoch * config.epochs;
  long step = 0;

  auto step_fn = [&](std::span<const int> idx, int epoch, int batch) {
    const int count = static_cast<int>(idx.size());
    std::vector<double> losses(idx.size());
    decoder::Decoder grad = nn::zeros_like(dec);
    nn::accumulate_chunks(count, dec, grad, [&](int i, decoder::Decoder& g) {
      const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
      decoder::DecoderCache cache;
      const auto pm = decoder::decode(dec, feats[k], queries[k], &cache);
      Mat dlogits;
      losses[static_cast<std::size_t>(i)] = sample_loss(pm, samples[k].gt_mask, 1.0 / count, dlogits);
      decoder::decoder_backward(dec, cache, dlogits, g);
    });
    const double lr = lr_at_step(step, total_steps, config);
    const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) / count;
    if (!std::isfinite(loss)) throw Error(Errc::nan_loss, nan_detail(epoch, batch, lr));
    adam.step(params, nn::params_of(grad), lr);
    ++step;
    return loss;
  };
  auto validate_fn = [&] {
    if (split.val.empty()) return 0.0;
    std::vector<double> ious(split.val.size());
    nn::parallel_for(static_cast<int>(split.val.size()), [&](int i) {
      const auto k = static_cast<std::size_t>(split.val[static_cast<std::size_t>(i)]);
      ious[static_cast<std::size_t>(i)] =
          evalkit::iou(decoder::decode(dec, feats[k], queries[k]).binary, samples[k].gt_mask);
    });
    return std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
  };
  auto after_epoch = [&](int epoch) {
    if (encoder.compute_fingerprint() != report.encoder_fingerprint_before) {
      throw Error(Errc::fingerprint_mismatch, "frozen encoder changed during epoch " + std::to_string(epoch));
    }
  };
  run_epochs(config, split, report, step_fn, validate_fn, after_epoch, progress);

  report.encoder_fingerprint_after = encoder.compute_fingerprint();
  report.decoder_fingerprint = dec.fingerprint();
  report.wall_seconds = seconds_since(t0);
  result.decoder = std::move(dec);
  result.encoder = encoder;
  return result;
}

// ---- full finetune --------------------------------------------------------

TrainResult train_full_finetune(dualenc::EncoderWeights encoder, decoder::Decoder dec,
                                std::span<const scenegen::LabeledSample> samples, const TrainConfig& config,
                                const TrainProgress& progress) {
  config.validate();
  if (config.freeze_encoder) throw Error(Errc::invalid_argument, "train_full_finetune requires freeze_encoder = false");
  check_samples(samples, dec);
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  TrainReport& report = result.report;
  const SplitIndices split = validation_split(static_cast<int>(samples.size()), config.val_fraction, config.seed);
  fill_common(report, config, encoder, dec, split);
  report.encoder_fingerprint_before = encoder.compute_fingerprint();

  encoder.frozen = false;
  JointModel model{std::move(encoder), std::move(dec)};
  const dualenc::Tokenizer tok(model.enc.config.vocabulary, model.enc.config.max_text_len);
  std::vector<std::vector<int>> ids(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) ids[i] = tok.tokenize(samples[i].query.text);
  const std::vector<int> taps = model.dec.config.taps;

  nn::ParamList params = nn::params_of(model);
  nn::Adam adam(params, config.adam);
  const long steps_per_epoch = (static_cast<long>(split.train.size()) + config.batch_size - 1) / config.batch_size;
  const long total_steps = steps_per_epoch * config.epochs;
  long step = 0;

  auto step_fn = [&](std::span<const int> idx, int epoch, int batch) {
    const int count = static_cast<int>(idx.size());
    std::vector<double> losses(idx.size());
    JointModel grad = nn::zeros_like(model);
    nn::accumulate_chunks(count, model, grad, [&](int i, JointModel& g) {
      const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
      dualenc::VisionCache vc;
      dualenc::TextCache tc;
      const auto enc = dualenc::vision_forward(model.enc, samples[k].image, taps, vc);
      const RowVec q = dualenc::text_forward(model.enc, ids[k], tc);
      decoder::DecoderCache cache;
      const auto pm = decoder::decode(model.dec, enc.projections.features, q, &cache);
      Mat dlogits;
      losses[static_cast<std::size_t>(i)] = sample_loss(pm, samples[k].gt_mask, 1.0 / count, dlogits);
      const auto dg = decoder::decoder_backward(model.dec, cache, dlogits, g.dec);
      dualenc::vision_backward(model.enc, vc, taps, dg.d_projections, RowVec(), g.enc);
      dualenc::text_backward(model.enc, tc, dg.d_q_e, g.enc);
    });
    const double lr = lr_at_step(step, total_steps, config);
    const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) / count;
    if (!std::isfinite(loss)) throw Error(Errc::nan_loss, nan_detail(epoch, batch, lr));
    adam.step(params, nn::params_of(grad), lr);
    ++step;
    return loss;
  };
  auto validate_fn = [&] {
    if (split.val.empty()) return 0.0;
    std::vector<double> ious(split.val.size());
    nn::parallel_for(static_cast<int>(split.val.size()), [&](int i) {
      const auto k = static_cast<std::size_t>(split.val[static_cast<std::size_t>(i)]);
      const auto enc = dualenc::encode_image(model.enc, samples[k].image, taps);
      dualenc::TextCache tc;
      const RowVec q = dualenc::text_forward(model.enc, ids[k], tc);
      ious[static_cast<std::size_t>(i)] =
          evalkit::iou(decoder::decode(model.dec, enc.projections.features, q).binary, samples[k].gt_mask);
    });
    return std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
  };
  run_epochs(config, split, report, step_fn, validate_fn, [](int) {}, progress);

  model.enc.fingerprint = model.enc.compute_fingerprint();
  report.encoder_fingerprint_after = model.enc.fingerprint;
  report.decoder_fingerprint = model.dec.fingerprint();
  report.wall_seconds = seconds_since(t0);
  result.decoder = std::move(model.dec);
  result.encoder = std::move(model.enc);
  return result;
}

}  // namespace groundlab::train
