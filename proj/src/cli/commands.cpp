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

#include "groundlab/cli/commands.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "groundlab/cli/config.hpp"
#include "groundlab/cli/pipeline.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/decoder/pipeline.hpp"
#include "groundlab/dualenc/checkpoint.hpp"
#include "groundlab/evalkit/report.hpp"
#include "groundlab/scenegen/query.hpp"

namespace groundlab::cli {

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

const std::vector<std::string> kSubcommands{"gen-data", "pretrain", "train",  "eval",
                                            "hybrid-eval", "ablate", "report", "repro"};

// Sizes for `repro.smoke = true`; file and command-line values still win.
const Overrides kSmoke{
    {"data.n_train", "40"},   {"data.n_test_seen", "16"}, {"data.n_test_unseen", "16"},
    {"pretrain.pairs", "96"}, {"pretrain.holdout", "16"}, {"pretrain.epochs", "1"},
    {"pretrain.mlm_epochs", "1"}, {"train.epochs", "2"},  {"train.full_epochs", "1"},
    {"eval.sa_trials", "4"},
};

struct Axis {
  std::string key;
  std::vector<std::string> defaults;
  bool encoder;  // values change the encoder, so each gets its own pretraining
};

const std::map<std::string, Axis>& axes() {
  static const std::map<std::string, Axis> a{
      {"fusion_variant", {"decoder.variant", {"hierarchical_film", "single_film", "cross_attention"}, false}},
      {"taps", {"encoder.taps", {"9", "5/9", "1/5/9", "1/3/5/7/9"}, true}},
      {"D", {"decoder.D", {"32", "64", "128"}, false}},
      {"backend", {"encoder.backend", {"base", "large"}, true}},
      {"provenance", {"encoder.provenance", {"joint", "disjoint"}, true}},
      {"pooling", {"encoder.pooling", {"eos", "mean"}, true}},
      {"freeze_encoder", {"train.freeze_encoder", {"true", "false"}, false}},
  };
  return a;
}

struct Args {
  std::string subcommand;
  std::optional<std::string> config_file;
  std::vector<std::string> sets;
  std::vector<std::string> positional;
  std::optional<long> seed;
  std::optional<std::string> out;
  std::optional<std::string> freeze;
  std::optional<std::string> variant;
  std::optional<std::string> axis;
  std::optional<std::string> values;
  bool quiet = false;
};

std::pair<std::string, std::string> split_pair(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(Errc::invalid_argument, "expected key=value, got '" + kv + "'");
  }
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

Overrides collect_overrides(const Args& a, std::vector<std::string>& paths) {
  Overrides o;
  for (const auto& s : a.sets) o.push_back(split_pair(s));
  for (const auto& p : a.positional) {
    if (p.find('=') != std::string::npos) {
      o.push_back(split_pair(p));
    } else {
      paths.push_back(p);
    }
  }
  if (a.seed) o.emplace_back("seed", std::to_string(*a.seed));
  if (a.out) o.emplace_back("out", *a.out);
  if (a.freeze) o.emplace_back("train.freeze_encoder", *a.freeze);
  if (a.variant) o.emplace_back("decoder.variant", *a.variant);
  if (a.axis) o.emplace_back("ablate.axis", *a.axis);
  if (a.values) o.emplace_back("ablate.values", *a.values);
  return o;
}

RunConfig resolve(const Args& a, const Overrides& overrides) {
  std::optional<std::filesystem::path> file;
  if (a.config_file) file = *a.config_file;
  RunConfig c = resolve_config(file, overrides);
  if (c.boolean("repro.smoke")) {
    Overrides layered = kSmoke;
    if (file) {
      for (auto& kv : parse_config_text(read_text(*file))) layered.push_back(kv);
    }
    layered.insert(layered.end(), overrides.begin(), overrides.end());
    c = resolve_config(std::nullopt, layered);
  }
  c.subcommand = a.subcommand;
  return c;
}

dualenc::EncoderWeights encoder_for_eval(const RunConfig& cfg, const scenegen::DatasetSplit& data, const Log& log) {
  if (cfg.boolean("train.freeze_encoder")) return obtain_encoder(cfg, data, log);
  const auto tag = cfg.train_config().variant_tag;
  std::string file = tag;
  std::replace(file.begin(), file.end(), '+', '.');
  return dualenc::load_encoder(cfg.out_dir() / ("encoder_" + file + ".glck"));
}

decoder::Decoder load_trained(const RunConfig& cfg, const dualenc::EncoderWeights& enc, const std::string& tag) {
  return decoder::load_decoder(decoder_path(cfg, tag), enc.fingerprint).decoder;
}

nlohmann::json meta(const RunConfig& cfg, const scenegen::DatasetSplit& data) {
  auto m = provenance(cfg, data.content_hash());
  m["subcommand"] = cfg.subcommand;
  return m;
}

int cmd_gen_data(const RunConfig& cfg, std::ostream& out, const Log& log) {
  const auto data = obtain_dataset(cfg, log);
  out << "dataset " << data.content_hash() << " train=" << data.train.size()
      << " test_seen=" << data.test_seen.size() << " test_unseen=" << data.test_unseen.size() << "\n";
  return kOk;
}

int cmd_pretrain(const RunConfig& cfg, std::ostream& out, const Log& log) {
  const auto catalog = scenegen::Catalog::standard();
  const auto w = pretrain_encoder(cfg, catalog, scenegen::grammar_vocabulary(catalog), log);
  out << "encoder " << w.fingerprint << " retrieval@1 " << w.metrics.retrieval_top1 << " -> "
      << encoder_path(cfg).string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, const Log& log) {
  const auto data = obtain_dataset(cfg, log);
  const auto enc = obtain_encoder(cfg, data, log);
  const auto r = train_variant(cfg, data, enc, log);
  out << r.report.variant_tag << " mode=" << (r.report.freeze_encoder ? "frozen_encoder" : "full_finetune")
      << " final_val_iou=" << (r.report.val_iou.empty() ? 0.0 : r.report.val_iou.back())
      << " trainable_fraction=" << r.report.trainable_fraction << "\n";
  return kOk;
}

void print_reports(std::ostream& out, const std::vector<evalkit::MetricsReport>& reports) {
  out << evalkit::overall_table(reports) << evalkit::bucket_table(reports);
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, const Log& log, bool hybrid) {
  const auto data = obtain_dataset(cfg, log);
  const auto enc = encoder_for_eval(cfg, data, log);
  const auto tag = cfg.train_config().variant_tag;
  const auto dec = load_trained(cfg, enc, tag);
  const auto reports =
      hybrid ? evaluate_hybrid(cfg, data, enc, dec, tag) : evaluate_decoder(cfg, data, enc, dec, tag);
  std::string dir = (hybrid ? "hybrid_" : "eval_") + tag;
  std::replace(dir.begin(), dir.end(), '+', '.');
  evalkit::emit_report(reports, cfg.out_dir() / dir, meta(cfg, data));
  print_reports(out, reports);
  return kOk;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out, const Log& log) {
  const auto name = cfg.text("ablate.axis");
  const auto it = axes().find(name);
  if (it == axes().end()) throw Error(Errc::invalid_argument, "unknown ablation axis '" + name + "'");
  const Axis& axis = it->second;
  auto values = cfg.text_list("ablate.values");
  if (values.empty()) values = axis.defaults;

  const auto data = obtain_dataset(cfg, log);
  const auto root = cfg.out_dir() / ("ablate_" + name);
  std::vector<evalkit::MetricsReport> reports;
  for (const auto& v : values) {
    RunConfig run = cfg;
    std::string text = v;
    std::replace(text.begin(), text.end(), '/', ',');
    run.set(axis.key, text);
    std::string leaf = v;
    std::replace(leaf.begin(), leaf.end(), '/', '-');
    run.set("out", (root / leaf).string());
    run.set("decoder.checkpoint", "");
    if (axis.encoder) run.set("encoder.checkpoint", "");
    write_snapshot(run, run.out_dir());
    if (log) log("ablation " + name + "=" + v);
    const auto enc = axis.encoder ? obtain_encoder(run, data, log) : obtain_encoder(cfg, data, log);
    const auto r = train_variant(run, data, enc, log);
    auto pair = evaluate_decoder(run, data, r.encoder, r.decoder, name + "=" + v);
    for (auto& rep : pair) rep.extra["trainable_fraction"] = r.report.trainable_fraction;
    reports.insert(reports.end(), pair.begin(), pair.end());
  }
  auto m = meta(cfg, data);
  m["axis"] = name;
  evalkit::emit_report(reports, root, m);
  print_reports(out, reports);
  return kOk;
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& paths, std::ostream& out) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) files.emplace_back(p);
  if (files.empty()) {
    if (!std::filesystem::exists(cfg.out_dir())) {
      throw Error(Errc::missing_file, "no metrics records under " + cfg.out_dir().string());
    }
    for (const auto& e : std::filesystem::recursive_directory_iterator(cfg.out_dir())) {
      if (e.is_regular_file() && e.path().filename() == "metrics.json" &&
          e.path().parent_path() != cfg.out_dir() / "report") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw Error(Errc::missing_file, "no metrics records under " + cfg.out_dir().string());
  std::vector<evalkit::MetricsReport> reports;
  for (const auto& f : files) {
    const auto record = nlohmann::json::parse(read_text(f));
    for (auto& r : evalkit::parse_report_record(record)) reports.push_back(std::move(r));
  }
  evalkit::emit_report(reports, cfg.out_dir() / "report", {{"sources", files.size()}});
  print_reports(out, reports);
  return kOk;
}

int cmd_repro(const RunConfig& cfg, std::ostream& out, const Log& log) {
  const auto catalog = scenegen::Catalog::standard();
  const auto vocab = scenegen::grammar_vocabulary(catalog);
  const auto path = encoder_path(cfg);
  dualenc::EncoderWeights enc;
  if (std::filesystem::exists(path)) {
    enc = dualenc::load_encoder(path);
    if (enc.config.to_json() != cfg.encoder_config(vocab).to_json()) {
      throw Error(Errc::fingerprint_mismatch, "encoder " + path.string() + " was built with another encoder config");
    }
  } else {
    enc = pretrain_encoder(cfg, catalog, vocab, log);
  }

  std::vector<SeedOutcome> outcomes;
  std::vector<evalkit::MetricsReport> reports;
  for (long s : cfg.int_list("repro.seeds")) {
    if (s < 0) throw Error(Errc::invalid_argument, "repro.seeds must be non-negative");
    if (log) log("seed " + std::to_string(s));
    outcomes.push_back(run_seed(cfg, static_cast<std::uint64_t>(s), enc, log));
    const auto all = outcomes.back().all();
    reports.insert(reports.end(), all.begin(), all.end());
  }
  const auto criteria = trend_criteria(outcomes);
  nlohmann::json m{{"config_hash", cfg.hash()}, {"seeds", cfg.int_list("repro.seeds")},
                   {"encoder_fingerprint", enc.fingerprint}};
  evalkit::emit_report(reports, cfg.out_dir() / "report", m);
  nlohmann::json crit = nlohmann::json::array();
  bool ok = true;
  for (const auto& c : criteria) {
    crit.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    ok = ok && c.pass;
  }
  write_text(cfg.out_dir() / "criteria.json", nlohmann::json{{"criteria", crit}, {"meta", m}}.dump(2) + "\n");
  const auto table = criteria_table(criteria);
  write_text(cfg.out_dir() / "criteria.tsv", table);
  out << evalkit::bucket_table(reports) << table;
  if (!ok && !cfg.boolean("repro.smoke")) return kAcceptance;
  return kOk;
}

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("-c,--config", a.config_file, "plain-text key = value config file");
  sub->add_option("--set", a.sets, "override, key=value (repeatable)");
  sub->add_option("--seed", a.seed, "master seed");
  sub->add_option("--out", a.out, "output directory");
  sub->add_flag("--freeze-encoder{true}", a.freeze, "train.freeze_encoder (use --freeze-encoder=false)");
  sub->add_option("--variant", a.variant, "decoder.variant");
  sub->add_flag("-q,--quiet", a.quiet, "no progress output");
  sub->add_option("overrides", a.positional, "key=value overrides; report also takes metrics.json paths");
}

void write_error(const nlohmann::json& record, const std::optional<std::filesystem::path>& dir, std::ostream& err) {
  err << record.dump() << "\n";
  if (!dir) return;
  try {
    std::filesystem::create_directories(*dir);
    write_text(*dir / "error.json", record.dump(2) + "\n");
  } catch (...) {
    // The stderr copy is enough when the directory itself is the problem.
  }
}

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::unknown_key:
    case Errc::type_mismatch:
    case Errc::invalid_argument:
    case Errc::unknown_variant:
      return kConfig;
    default:
      return kRuntime;
  }
}

nlohmann::json error_record(const std::string& subcommand, const std::string& code, const std::string& message,
                            int exit_code) {
  return {{"error", code}, {"message", message}, {"subcommand", subcommand}, {"exit_code", exit_code}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"groundlab: referring segmentation experiments on synthetic scenes", "groundlab"};
  app.require_subcommand(1);
  Args a;
  const std::map<std::string, std::string> help{
      {"gen-data", "generate and persist the dataset splits"},
      {"pretrain", "contrastively pretrain and freeze the dual encoder"},
      {"train", "train a decoder variant (frozen encoder unless --freeze-encoder=false)"},
      {"eval", "evaluate a trained decoder on test_seen and test_unseen"},
      {"hybrid-eval", "evaluate the simulated detector alone and re-ranked by the decoder"},
      {"ablate", "sweep one axis (--axis) and emit a comparison table"},
      {"report", "merge metrics records into tables"},
      {"repro", "run the seeded trend experiments and check them"},
  };
  for (const auto& name : kSubcommands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, a);
    if (name == "ablate") {
      sub->add_option("--axis", a.axis, "fusion_variant, taps, D, backend, provenance, pooling, freeze_encoder");
      sub->add_option("--values", a.values, "comma-separated values; '/' separates taps within one value");
    }
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    write_error(error_record("", "usage", e.what(), kUsage), std::nullopt, err);
    err << app.help();
    return kUsage;
  }
  for (auto* sub : app.get_subcommands()) a.subcommand = sub->get_name();

  std::optional<std::filesystem::path> out_dir;
  try {
    std::vector<std::string> paths;
    const auto overrides = collect_overrides(a, paths);
    for (const auto& [k, v] : overrides) {
      if (k == "out") out_dir = v;
    }
    const RunConfig cfg = resolve(a, overrides);
    out_dir = cfg.out_dir();
    if (!paths.empty() && a.subcommand != "report") {
      throw Error(Errc::invalid_argument, "unexpected argument '" + paths.front() + "'");
    }
    write_snapshot(cfg, cfg.out_dir());
    const Log log = a.quiet ? Log{} : Log([&err](const std::string& line) { err << "[groundlab] " << line << std::endl; });

    if (a.subcommand == "gen-data") return cmd_gen_data(cfg, out, log);
    if (a.subcommand == "pretrain") return cmd_pretrain(cfg, out, log);
    if (a.subcommand == "train") return cmd_train(cfg, out, log);
    if (a.subcommand == "eval") return cmd_eval(cfg, out, log, false);
    if (a.subcommand == "hybrid-eval") return cmd_eval(cfg, out, log, true);
    if (a.subcommand == "ablate") return cmd_ablate(cfg, out, log);
    if (a.subcommand == "report") return cmd_report(cfg, paths, out);
    if (a.subcommand == "repro") return cmd_repro(cfg, out, log);
    throw Error(Errc::invalid_argument, "unknown subcommand '" + a.subcommand + "'");
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    write_error(error_record(a.subcommand, std::string(errc_name(e.code())), e.what(), code), out_dir, err);
    return code;
  } catch (const std::exception& e) {
    write_error(error_record(a.subcommand, "runtime", e.what(), kRuntime), out_dir, err);
    return kRuntime;
  }
}

}  // namespace groundlab::cli
