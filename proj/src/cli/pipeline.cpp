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

#include "groundlab/cli/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/core/random.hpp"
#include "groundlab/decoder/pipeline.hpp"
#include "groundlab/dualenc/checkpoint.hpp"
#include "groundlab/dualenc/pretrain.hpp"
#include "groundlab/evalkit/predictors.hpp"
#include "groundlab/evalkit/sa.hpp"
#include "groundlab/scenegen/dataset_io.hpp"

namespace groundlab::cli {

namespace {

constexpr std::uint64_t kDecoderStream = 0x646563;  // "dec"
constexpr std::uint64_t kDetectorStream = 0x646574;
constexpr std::uint64_t kSaStream = 0x7361;

std::string file_tag(std::string tag) {
  std::replace(tag.begin(), tag.end(), '+', '.');
  return tag;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void say(const Log& log, const std::string& line) {
  if (log) log(line);
}

evalkit::ModelIdentity identity(const std::string& tag, const std::string& fingerprint,
                                const scenegen::DatasetSplit& data, std::uint64_t seed) {
  return {tag, fingerprint, data.content_hash(), seed};
}

}  // namespace

std::filesystem::path data_dir(const RunConfig& config) {
  const auto& d = config.text("data.dir");
  return d.empty() ? config.out_dir() / "data" : std::filesystem::path(d);
}

std::filesystem::path encoder_path(const RunConfig& config) {
  const auto& p = config.text("encoder.checkpoint");
  return p.empty() ? config.out_dir() / "encoder.glck" : std::filesystem::path(p);
}

std::filesystem::path decoder_path(const RunConfig& config, const std::string& tag) {
  const auto& p = config.text("decoder.checkpoint");
  return p.empty() ? config.out_dir() / ("decoder_" + file_tag(tag) + ".glck") : std::filesystem::path(p);
}

nlohmann::json provenance(const RunConfig& config, const std::string& dataset_hash) {
  return {{"config_hash", config.hash()}, {"dataset_hash", dataset_hash}, {"seed", config.seed()}};
}

scenegen::DatasetSplit obtain_dataset(const RunConfig& config, const Log& log) {
  const auto dir = data_dir(config);
  const auto wanted = config.dataset_config();
  if (std::filesystem::exists(dir / "index.json")) {
    auto data = scenegen::load_dataset(dir);
    if (!(data.config == wanted)) {
      throw Error(Errc::fingerprint_mismatch, "dataset in " + dir.string() + " was generated with another config");
    }
    say(log, "loaded dataset " + dir.string());
    return data;
  }
  say(log, "generating dataset (seed " + std::to_string(wanted.master_seed) + ")");
  auto data = scenegen::build_dataset(wanted);
  scenegen::persist_dataset(data, dir);
  say(log, "dataset " + data.content_hash().substr(0, 12) + " -> " + dir.string());
  return data;
}

dualenc::EncoderWeights pretrain_encoder(const RunConfig& config, const scenegen::Catalog& catalog,
                                         const std::vector<std::string>& vocabulary, const Log& log) {
  const auto enc_cfg = config.encoder_config(vocabulary);
  const auto pre = config.pretrain_config();
  const auto pairs = dualenc::build_caption_corpus(catalog, static_cast<int>(config.integer("pretrain.pairs")),
                                                   pre.seed, enc_cfg.image_size, pre.group_size);
  say(log, "pretraining encoder on " + std::to_string(pairs.size()) + " caption pairs");
  auto weights = dualenc::contrastive_pretrain(pairs, enc_cfg, pre, [&](int epoch, double loss) {
    say(log, "  pretrain epoch " + std::to_string(epoch) + " loss " + num(loss));
  });
  weights = dualenc::freeze(std::move(weights));
  say(log, "retrieval@1 " + num(weights.metrics.retrieval_top1));
  const auto path = encoder_path(config);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  dualenc::save_encoder(path, weights);
  return weights;
}

dualenc::EncoderWeights obtain_encoder(const RunConfig& config, const scenegen::DatasetSplit& data,
                                       const Log& log) {
  const auto path = encoder_path(config);
  if (!std::filesystem::exists(path)) return pretrain_encoder(config, data.catalog, data.vocabulary, log);
  auto weights = dualenc::load_encoder(path);
  if (weights.config.to_json() != config.encoder_config(data.vocabulary).to_json()) {
    throw Error(Errc::fingerprint_mismatch, "encoder " + path.string() + " was built with another encoder config");
  }
  say(log, "loaded encoder " + path.string());
  return weights;
}

decoder::DecoderConfig decoder_config(const RunConfig& config, const dualenc::EncoderConfig& encoder) {
  auto c = decoder::config_for(encoder, static_cast<int>(config.integer("decoder.D")), config.variant());
  c.head_channels = static_cast<int>(config.integer("decoder.head_channels"));
  c.tap_order = decoder::parse_tap_order(config.text("decoder.tap_order"));
  c.validate();
  return c;
}

train::TrainResult train_variant(const RunConfig& config, const scenegen::DatasetSplit& data,
                                 const dualenc::EncoderWeights& encoder, const Log& log) {
  const auto tc = config.train_config();
  auto dec = decoder::build_variant(decoder_config(config, encoder.config),
                                    derive_seed(config.seed(), kDecoderStream));
  say(log, "training " + tc.variant_tag + " for " + std::to_string(tc.epochs) + " epochs");
  const auto progress = [&](int epoch, double loss, double val) {
    say(log, "  epoch " + std::to_string(epoch) + " loss " + num(loss) + " val IoU " + num(val));
  };
  auto result = tc.freeze_encoder ? train::train_decoder(encoder, std::move(dec), data.train, tc, progress)
                                  : train::train_full_finetune(encoder, std::move(dec), data.train, tc, progress);
  const auto hash = data.content_hash();
  result.report.dataset_hash = hash;
  const auto path = decoder_path(config, tc.variant_tag);
  // Location-free so relocated runs produce identical bytes.
  result.report.checkpoint_path = path.filename().string();

  std::filesystem::create_directories(config.out_dir());
  nlohmann::json extra = provenance(config, hash);
  extra["variant"] = tc.variant_tag;
  decoder::save_decoder(path, result.decoder, result.encoder.fingerprint, extra);
  if (!tc.freeze_encoder) {
    dualenc::save_encoder(config.out_dir() / ("encoder_" + file_tag(tc.variant_tag) + ".glck"), result.encoder);
  }
  nlohmann::json record = provenance(config, hash);
  record["report"] = result.report.to_json();
  write_text(config.out_dir() / ("train_report_" + file_tag(tc.variant_tag) + ".json"), record.dump(2) + "\n");
  say(log, "trainable fraction " + num(result.report.trainable_fraction));
  return result;
}

double sa_for(const evalkit::Predictor& predictor, const scenegen::DatasetSplit& data,
              std::span<const scenegen::LabeledSample> samples, int trials, std::uint64_t seed) {
  std::vector<const scenegen::LabeledSample*> order;
  for (const auto& s : samples) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->sample_id < b->sample_id; });
  std::vector<evalkit::SaTrial> done;
  for (const auto* s : order) {
    if (static_cast<int>(done.size()) >= trials) break;
    const auto& scene = data.scene(s->scene_id);
    const auto segment = [&](const std::string& text) {
      scenegen::LabeledSample probe = *s;
      probe.query.text = text;
      return predictor(probe);
    };
    Rng rng(derive_seed(seed, kSaStream, static_cast<std::uint64_t>(s->sample_id)));
    try {
      done.push_back(evalkit::run_sa_trial(scene, s->query.target_id, segment, rng, data.catalog));
    } catch (const Error& e) {
      if (e.code() != Errc::indistinguishable) throw;
    }
  }
  return evalkit::sa_score(done);
}

std::vector<evalkit::MetricsReport> evaluate_decoder(const RunConfig& config, const scenegen::DatasetSplit& data,
                                                     const dualenc::EncoderWeights& encoder,
                                                     const decoder::Decoder& dec, const std::string& tag) {
  const auto predictor = evalkit::decoder_predictor(encoder, dec);
  const auto id = identity(tag, dec.fingerprint(), data, config.seed());
  const auto hash = data.content_hash();
  const auto mc = config.metrics_config();
  std::vector<evalkit::MetricsReport> out;
  out.push_back(evalkit::evaluate(predictor, data.test_seen, "test_seen", hash, id, data.catalog, mc));
  out.push_back(evalkit::evaluate(predictor, data.test_unseen, "test_unseen", hash, id, data.catalog, mc));
  const int trials = static_cast<int>(config.integer("eval.sa_trials"));
  if (trials > 0) out.back().extra["sa"] = sa_for(predictor, data, data.test_unseen, trials, config.seed());
  return out;
}

std::vector<evalkit::MetricsReport> evaluate_hybrid(const RunConfig& config, const scenegen::DatasetSplit& data,
                                                    const dualenc::EncoderWeights& encoder,
                                                    const decoder::Decoder& dec, const std::string& tag) {
  const auto dc = config.detector_config();
  const auto det_seed = derive_seed(config.seed(), kDetectorStream);
  const auto hash = data.content_hash();
  const auto mc = config.metrics_config();
  const int trials = static_cast<int>(config.integer("eval.sa_trials"));

  const auto det = evalkit::detector_predictor(data, dc, det_seed);
  auto det_report = evalkit::evaluate(det, data.test_unseen, "test_unseen", hash,
                                      identity("detector", "", data, config.seed()), data.catalog, mc);
  det_report.extra["detector"] = dc.to_json();

  evalkit::HybridStats stats;
  const auto hyb = evalkit::hybrid_predictor(data, encoder, dec, dc, det_seed, &stats);
  auto hyb_report = evalkit::evaluate(hyb, data.test_unseen, "test_unseen", hash,
                                      identity("hybrid+" + tag, dec.fingerprint(), data, config.seed()),
                                      data.catalog, mc);
  hyb_report.extra["fallbacks"] = stats.fallbacks.load();
  hyb_report.extra["detector"] = dc.to_json();
  if (trials > 0) {
    det_report.extra["sa"] = sa_for(det, data, data.test_unseen, trials, config.seed());
    hyb_report.extra["sa"] = sa_for(hyb, data, data.test_unseen, trials, config.seed());
  }
  return {det_report, hyb_report};
}

std::vector<evalkit::MetricsReport> SeedOutcome::all() const {
  return {hier_seen, hier_unseen, cross_unseen, full_unseen, detector_unseen, hybrid_unseen};
}

SeedOutcome run_seed(const RunConfig& base, std::uint64_t seed, const dualenc::EncoderWeights& encoder,
                     const Log& log) {
  RunConfig cfg = base;
  cfg.set("seed", std::to_string(seed));
  cfg.set("out", (base.out_dir() / ("seed_" + std::to_string(seed))).string());
  cfg.set("data.dir", "");
  cfg.set("decoder.checkpoint", "");
  write_snapshot(cfg, cfg.out_dir());
  const auto data = obtain_dataset(cfg, log);

  SeedOutcome out;
  out.seed = seed;

  cfg.set("train.freeze_encoder", "true");
  cfg.set("decoder.variant", "hierarchical_film");
  const auto hier = train_variant(cfg, data, encoder, log);
  out.hier_trainable_fraction = hier.report.trainable_fraction;
  auto hier_reports = evaluate_decoder(cfg, data, encoder, hier.decoder, "hierarchical_film");
  out.hier_seen = hier_reports[0];
  out.hier_unseen = hier_reports[1];
  auto hybrid = evaluate_hybrid(cfg, data, encoder, hier.decoder, "hierarchical_film");
  out.detector_unseen = hybrid[0];
  out.hybrid_unseen = hybrid[1];

  cfg.set("decoder.variant", "cross_attention");
  const auto cross = train_variant(cfg, data, encoder, log);
  out.cross_unseen = evaluate_decoder(cfg, data, encoder, cross.decoder, "cross_attention")[1];

  cfg.set("decoder.variant", "hierarchical_film");
  cfg.set("train.freeze_encoder", "false");
  const auto full = train_variant(cfg, data, encoder, log);
  out.full_unseen =
      evaluate_decoder(cfg, data, full.encoder, full.decoder, "hierarchical_film+full_finetune")[1];
  return out;
}

namespace {

double bucket(const evalkit::MetricsReport& r, int a) {
  for (const auto& b : r.buckets) {
    if (b.attributes == a) return b.mean_iou.value_or(0.0);
  }
  return 0.0;
}

template <class F>
double mean_over(std::span<const SeedOutcome> o, F f) {
  double s = 0.0;
  for (const auto& x : o) s += f(x);
  return o.empty() ? 0.0 : s / static_cast<double>(o.size());
}

int majority(std::size_t n) { return static_cast<int>(n / 2 + 1); }

}  // namespace

std::vector<CriterionResult> trend_criteria(std::span<const SeedOutcome> outcomes) {
  std::vector<CriterionResult> out;
  const auto need = majority(outcomes.size());
  const auto seeds_detail = [&](auto f) {
    std::string d;
    for (const auto& o : outcomes) d += (d.empty() ? "" : "; ") + std::to_string(o.seed) + ": " + f(o);
    return d;
  };

  const double seen = mean_over(outcomes, [](const SeedOutcome& o) { return o.hier_seen.mean_iou; });
  out.push_back({8, "closed-vocabulary mean IoU >= 0.75", seen >= 0.75, "mean over seeds " + num(seen)});

  int wins = 0;
  for (const auto& o : outcomes) wins += o.hier_unseen.mean_iou > o.full_unseen.mean_iou;
  out.push_back({9, "frozen beats full finetune on test_unseen", wins >= need,
                 std::to_string(wins) + "/" + std::to_string(outcomes.size()) + " seeds; " +
                     seeds_detail([](const SeedOutcome& o) {
                       return num(o.hier_unseen.mean_iou) + " vs " + num(o.full_unseen.mean_iou);
                     })});

  wins = 0;
  for (const auto& o : outcomes) wins += o.hier_unseen.mean_iou >= o.cross_unseen.mean_iou;
  out.push_back({10, "hierarchical FiLM >= cross attention on test_unseen", wins >= need,
                 std::to_string(wins) + "/" + std::to_string(outcomes.size()) + " seeds; " +
                     seeds_detail([](const SeedOutcome& o) {
                       return num(o.hier_unseen.mean_iou) + " vs " + num(o.cross_unseen.mean_iou);
                     })});

  const double a1 = mean_over(outcomes, [](const SeedOutcome& o) { return bucket(o.detector_unseen, 1); });
  const double a4 = mean_over(outcomes, [](const SeedOutcome& o) { return bucket(o.detector_unseen, 4); });
  out.push_back({11, "detector A=4 at least 10 points below A=1", a4 <= a1 - 0.10,
                 "A=1 " + num(a1) + ", A=4 " + num(a4)});

  wins = 0;
  for (const auto& o : outcomes) {
    const double floor = std::max(o.detector_unseen.mean_iou, o.hier_unseen.mean_iou) - 0.01;
    const bool overall = o.hybrid_unseen.mean_iou >= floor;
    const bool hard = bucket(o.hybrid_unseen, 3) > bucket(o.detector_unseen, 3) &&
                      bucket(o.hybrid_unseen, 4) > bucket(o.detector_unseen, 4);
    wins += overall && hard;
  }
  out.push_back({12, "hybrid >= best single model and beats detector at A>=3", wins >= need,
                 std::to_string(wins) + "/" + std::to_string(outcomes.size()) + " seeds; " +
                     seeds_detail([](const SeedOutcome& o) {
                       return "hybrid " + num(o.hybrid_unseen.mean_iou) + " det " +
                              num(o.detector_unseen.mean_iou) + " dec " + num(o.hier_unseen.mean_iou) +
                              " A3 " + num(bucket(o.hybrid_unseen, 3)) + "/" + num(bucket(o.detector_unseen, 3)) +
                              " A4 " + num(bucket(o.hybrid_unseen, 4)) + "/" + num(bucket(o.detector_unseen, 4));
                     })});

  bool small = !outcomes.empty();
  for (const auto& o : outcomes) small = small && o.hier_trainable_fraction < 0.15;
  out.push_back({13, "decoder trainable share < 15%", small,
                 seeds_detail([](const SeedOutcome& o) { return num(o.hier_trainable_fraction); })});
  return out;
}

std::string criteria_table(std::span<const CriterionResult> results) {
  std::ostringstream os;
  os << "id\tstatus\tcriterion\tdetail\n";
  for (const auto& r : results) {
    os << r.id << '\t' << (r.pass ? "PASS" : "FAIL") << '\t' << r.name << '\t' << r.detail << "\n";
  }
  return os.str();
}

}  // namespace groundlab::cli
