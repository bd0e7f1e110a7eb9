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

#include "groundlab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <system_error>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/core/hash.hpp"

namespace groundlab::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

const KeySpec& spec_for(const std::string& key) {
  for (const auto& s : schema()) {
    if (s.key == key) return s;
  }
  throw Error(Errc::unknown_key, "unknown config key '" + key + "'");
}

bool parse_long(const std::string& t, long& out) {
  const auto* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, out);
  return ec == std::errc() && p == end && !t.empty();
}

bool parse_double(const std::string& t, double& out) {
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

template <typename T>
const T& as(const Value& v, const std::string& key, ValueType expected) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw Error(Errc::type_mismatch, "config key '" + key + "' is not of type " + std::string(to_string(expected)));
}

}  // namespace

bool is_location_key(std::string_view key) {
  return key == "out" || key == "data.dir" || key == "encoder.checkpoint" || key == "decoder.checkpoint";
}

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::boolean: return "boolean";
    case ValueType::text: return "text";
    case ValueType::int_list: return "integer list";
    case ValueType::real_list: return "real list";
    case ValueType::text_list: return "text list";
  }
  return "?";
}

const std::vector<KeySpec>& schema() {
  using T = ValueType;
  static const std::vector<KeySpec> s = {
      {"seed", T::integer, "13", "master seed for data, initialisation, shuffling and detector noise"},
      {"out", T::text, "runs/default", "output directory"},
      {"data.dir", T::text, "", "dataset directory (default: <out>/data)"},
      {"data.image_size", T::integer, "128", "image side in pixels"},
      {"data.n_train", T::integer, "800", "training samples"},
      {"data.n_test_seen", T::integer, "200", "test samples over seen categories"},
      {"data.n_test_unseen", T::integer, "200", "test samples over held-out categories"},
      {"data.unseen_categories", T::text_list, "container,sprayer,wrench,multimeter", "held-out categories"},
      {"data.attribute_mix", T::real_list, "0.25,0.25,0.25,0.25", "share of A=1..4 queries"},
      {"encoder.checkpoint", T::text, "", "frozen encoder checkpoint (default: <out>/encoder.glck)"},
      {"encoder.backend", T::text, "base", "base or large"},
      {"encoder.provenance", T::text, "joint", "joint or disjoint text tower"},
      {"encoder.pooling", T::text, "eos", "eos or mean text pooling"},
      {"encoder.taps", T::int_list, "1,3,5,7,9", "vision blocks tapped for the decoder (K)"},
      {"pretrain.pairs", T::integer, "2432", "caption pairs, holdout included"},
      {"pretrain.epochs", T::integer, "8", "contrastive epochs"},
      {"pretrain.batch_size", T::integer, "32", "contrastive batch"},
      {"pretrain.base_lr", T::real, "0.001", "peak learning rate"},
      {"pretrain.min_lr", T::real, "0.00001", "final learning rate"},
      {"pretrain.temperature", T::real, "0.07", "initial softmax temperature"},
      {"pretrain.holdout", T::integer, "32", "pairs kept for the retrieval check"},
      {"pretrain.group_size", T::integer, "4", "consecutive caption pairs sharing one colour"},
      {"pretrain.mlm_epochs", T::integer, "20", "masked-token epochs (disjoint provenance)"},
      {"pretrain.seed", T::integer, "7", "pretraining seed, independent of the master seed"},
      {"decoder.checkpoint", T::text, "", "decoder checkpoint for eval (default: <out>/decoder_<variant>.glck)"},
      {"decoder.D", T::integer, "64", "decoder width"},
      {"decoder.variant", T::text, "hierarchical_film", "hierarchical_film, single_film or cross_attention"},
      {"decoder.head_channels", T::integer, "8", "channels between the upsampling stages"},
      {"decoder.tap_order", T::text, "ascending", "ascending or descending"},
      {"train.epochs", T::integer, "30", "decoder epochs"},
      {"train.full_epochs", T::integer, "8", "epochs for the full-finetune baseline"},
      {"train.batch_size", T::integer, "16", "batch size"},
      {"train.base_lr", T::real, "0.001", "peak learning rate"},
      {"train.min_lr", T::real, "0.00001", "final learning rate"},
      {"train.beta1", T::real, "0.9", "Adam beta1"},
      {"train.beta2", T::real, "0.999", "Adam beta2"},
      {"train.eps", T::real, "1e-08", "Adam epsilon"},
      {"train.val_fraction", T::real, "0.1", "held-out share of the training split"},
      {"train.freeze_encoder", T::boolean, "true", "false trains encoder and decoder jointly"},
      {"detector.top_k", T::integer, "3", "candidates per query"},
      {"detector.max_radius", T::integer, "2", "largest boundary dilation/erosion radius"},
      {"detector.iou_floor", T::real, "0.7", "minimum IoU of a perturbed mask with the original"},
      {"detector.score_noise", T::real, "0.1", "score noise standard deviation"},
      {"detector.category_recall", T::real, "0.9", "probability the head noun is recognised"},
      {"eval.thresholds", T::real_list, "50,60,70,80,90", "P@X thresholds (percent)"},
      {"eval.sa_trials", T::integer, "100", "segmentation-accuracy trials on unseen scenes"},
      {"ablate.axis", T::text, "fusion_variant",
       "fusion_variant, taps, D, backend, provenance, pooling or freeze_encoder"},
      {"ablate.values", T::text_list, "", "values to sweep (default: every option on the axis)"},
      {"repro.seeds", T::int_list, "13,14,15", "seeds for the trend experiments"},
      {"repro.smoke", T::boolean, "false", "tiny sizes for a fast end-to-end check"},
  };
  return s;
}

Value parse_value(const std::string& key, ValueType type, const std::string& raw) {
  const std::string text = trim(raw);
  const auto fail = [&]() -> Error {
    return Error(Errc::type_mismatch,
                 "config key '" + key + "' expects " + std::string(to_string(type)) + ", got '" + text + "'");
  };
  switch (type) {
    case ValueType::integer: {
      long v;
      if (!parse_long(text, v)) throw fail();
      return v;
    }
    case ValueType::real: {
      double v;
      if (!parse_double(text, v)) throw fail();
      return v;
    }
    case ValueType::boolean: {
      std::string t = text;
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (t == "true" || t == "1" || t == "yes") return true;
      if (t == "false" || t == "0" || t == "no") return false;
      throw fail();
    }
    case ValueType::text: return text;
    case ValueType::int_list: {
      std::vector<long> out;
      for (const auto& item : split_list(text)) {
        long v;
        if (!parse_long(item, v)) throw fail();
        out.push_back(v);
      }
      return out;
    }
    case ValueType::real_list: {
      std::vector<double> out;
      for (const auto& item : split_list(text)) {
        double v;
        if (!parse_double(item, v)) throw fail();
        out.push_back(v);
      }
      return out;
    }
    case ValueType::text_list: return split_list(text);
  }
  throw fail();
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string format_value(const Value& v) {
  std::ostringstream os;
  std::visit(
      [&](const auto& x) {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, bool>) {
          os << (x ? "true" : "false");
        } else if constexpr (std::is_same_v<X, double>) {
          os << shortest(x);
        } else if constexpr (std::is_same_v<X, long> || std::is_same_v<X, std::string>) {
          os << x;
        } else if constexpr (std::is_same_v<X, std::vector<double>>) {
          for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << shortest(x[i]);
        } else {
          for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        }
      },
      v);
  return os.str();
}

RunConfig::RunConfig() {
  for (const auto& s : schema()) values_[s.key] = parse_value(s.key, s.type, s.default_text);
}

void RunConfig::set(const std::string& key, const std::string& text) {
  const auto& s = spec_for(key);
  values_[key] = parse_value(key, s.type, text);
}

const Value& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::unknown_key, "unknown config key '" + key + "'");
  return it->second;
}

long RunConfig::integer(const std::string& key) const { return as<long>(get(key), key, ValueType::integer); }
double RunConfig::real(const std::string& key) const { return as<double>(get(key), key, ValueType::real); }
bool RunConfig::boolean(const std::string& key) const { return as<bool>(get(key), key, ValueType::boolean); }
const std::string& RunConfig::text(const std::string& key) const {
  return as<std::string>(get(key), key, ValueType::text);
}
std::vector<long> RunConfig::int_list(const std::string& key) const {
  return as<std::vector<long>>(get(key), key, ValueType::int_list);
}
std::vector<double> RunConfig::real_list(const std::string& key) const {
  return as<std::vector<double>>(get(key), key, ValueType::real_list);
}
const std::vector<std::string>& RunConfig::text_list(const std::string& key) const {
  return as<std::vector<std::string>>(get(key), key, ValueType::text_list);
}

std::string RunConfig::snapshot() const {
  std::ostringstream os;
  for (const auto& s : schema()) os << s.key << " = " << format_value(values_.at(s.key)) << "\n";
  return os.str();
}

std::string RunConfig::hash() const {
  std::ostringstream os;
  for (const auto& s : schema()) {
    if (is_location_key(s.key)) continue;
    os << s.key << " = " << format_value(values_.at(s.key)) << "\n";
  }
  return sha256_hex(os.str());
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : schema()) j[s.key] = format_value(values_.at(s.key));
  return j;
}

std::uint64_t RunConfig::seed() const {
  const long s = integer("seed");
  if (s < 0) throw Error(Errc::invalid_argument, "seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::filesystem::path RunConfig::out_dir() const { return text("out"); }

scenegen::DatasetConfig RunConfig::dataset_config() const {
  scenegen::DatasetConfig c;
  c.master_seed = seed();
  c.image_size = static_cast<int>(integer("data.image_size"));
  c.n_train = static_cast<int>(integer("data.n_train"));
  c.n_test_seen = static_cast<int>(integer("data.n_test_seen"));
  c.n_test_unseen = static_cast<int>(integer("data.n_test_unseen"));
  c.unseen_categories = text_list("data.unseen_categories");
  c.attribute_mix = real_list("data.attribute_mix");
  return c;
}

dualenc::EncoderConfig RunConfig::encoder_config(const std::vector<std::string>& vocabulary) const {
  auto c = dualenc::EncoderConfig::preset(dualenc::parse_backend(text("encoder.backend")));
  c.image_size = static_cast<int>(integer("data.image_size"));
  c.provenance = dualenc::parse_provenance(text("encoder.provenance"));
  c.pooling = dualenc::parse_pooling(text("encoder.pooling"));
  c.taps.clear();
  for (long t : int_list("encoder.taps")) c.taps.push_back(static_cast<int>(t));
  c.vocabulary = vocabulary;
  c.validate();
  return c;
}

dualenc::PretrainConfig RunConfig::pretrain_config() const {
  dualenc::PretrainConfig c;
  c.epochs = static_cast<int>(integer("pretrain.epochs"));
  c.batch_size = static_cast<int>(integer("pretrain.batch_size"));
  c.base_lr = real("pretrain.base_lr");
  c.min_lr = real("pretrain.min_lr");
  c.initial_temperature = real("pretrain.temperature");
  c.holdout = static_cast<int>(integer("pretrain.holdout"));
  c.mlm_epochs = static_cast<int>(integer("pretrain.mlm_epochs"));
  c.group_size = static_cast<int>(integer("pretrain.group_size"));
  c.seed = static_cast<std::uint64_t>(integer("pretrain.seed"));
  return c;
}

decoder::FusionVariant RunConfig::variant() const { return decoder::parse_variant(text("decoder.variant")); }

train::TrainConfig RunConfig::train_config() const {
  train::TrainConfig c;
  c.freeze_encoder = boolean("train.freeze_encoder");
  c.epochs = static_cast<int>(integer(c.freeze_encoder ? "train.epochs" : "train.full_epochs"));
  c.batch_size = static_cast<int>(integer("train.batch_size"));
  c.base_lr = real("train.base_lr");
  c.min_lr = real("train.min_lr");
  c.adam.beta1 = real("train.beta1");
  c.adam.beta2 = real("train.beta2");
  c.adam.eps = real("train.eps");
  c.val_fraction = real("train.val_fraction");
  c.seed = seed();
  c.variant_tag = text("decoder.variant") + (c.freeze_encoder ? "" : "+full_finetune");
  c.validate();
  return c;
}

detector::DetectorConfig RunConfig::detector_config() const {
  detector::DetectorConfig c;
  c.top_k = static_cast<int>(integer("detector.top_k"));
  c.max_radius = static_cast<int>(integer("detector.max_radius"));
  c.iou_floor = real("detector.iou_floor");
  c.score_noise = real("detector.score_noise");
  c.category_recall = real("detector.category_recall");
  c.validate();
  return c;
}

evalkit::MetricsConfig RunConfig::metrics_config() const {
  evalkit::MetricsConfig c;
  c.thresholds = real_list("eval.thresholds");
  c.validate();
  return c;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::invalid_argument, "config line " + std::to_string(line_no) + " has no '='");
    }
    const std::string key = trim(t.substr(0, eq));
    const auto& s = spec_for(key);
    parse_value(key, s.type, t.substr(eq + 1));  // type check with the line at hand
    out.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig c;
  if (file) {
    for (const auto& [k, v] : parse_config_text(read_text(*file))) c.set(k, v);
  }
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

std::filesystem::path write_snapshot(const RunConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / "config.snapshot";
  write_text(path, config.snapshot());
  return path;
}

}  // namespace groundlab::cli
