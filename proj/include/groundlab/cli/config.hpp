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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/decoder/decoder.hpp"
#include "groundlab/detector/detector.hpp"
#include "groundlab/dualenc/encoder.hpp"
#include "groundlab/dualenc/pretrain.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/scenegen/dataset.hpp"
#include "groundlab/train/train.hpp"

namespace groundlab::cli {

enum class ValueType { integer, real, boolean, text, int_list, real_list, text_list };
std::string_view to_string(ValueType t);

using Value = std::variant<long, double, bool, std::string, std::vector<long>, std::vector<double>,
                           std::vector<std::string>>;

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_text;
  std::string help;
};

/// Output and input paths; excluded from the config hash.
bool is_location_key(std::string_view key);

/// Every accepted key with its type, default and one-line help, in snapshot order.
const std::vector<KeySpec>& schema();

/// Parses `text` as `type`. Lists are comma-separated; booleans accept
/// true/false/1/0/yes/no. Throws type-mismatch naming `key`.
Value parse_value(const std::string& key, ValueType type, const std::string& text);
std::string format_value(const Value& v);

class RunConfig {
 public:
  /// All keys at their documented defaults.
  RunConfig();

  /// Throws unknown-key or type-mismatch.
  void set(const std::string& key, const std::string& text);
  const Value& get(const std::string& key) const;

  long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<long> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  const std::vector<std::string>& text_list(const std::string& key) const;

  /// "key = value" lines in schema order; what a run writes next to its outputs.
  std::string snapshot() const;
  /// SHA-256 of the snapshot without location keys, so relocated runs share it.
  std::string hash() const;
  nlohmann::json to_json() const;

  std::string subcommand;
  std::vector<std::string> positional;

  // Typed views used by the commands.
  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  scenegen::DatasetConfig dataset_config() const;
  dualenc::EncoderConfig encoder_config(const std::vector<std::string>& vocabulary) const;
  dualenc::PretrainConfig pretrain_config() const;
  decoder::FusionVariant variant() const;
  train::TrainConfig train_config() const;
  detector::DetectorConfig detector_config() const;
  evalkit::MetricsConfig metrics_config() const;

 private:
  std::map<std::string, Value> values_;
};

/// Plain-text "key = value" lines; '#' starts a comment; blank lines ignored.
/// Throws unknown-key, type-mismatch, or invalid-argument on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Defaults, then the file (if given), then the overrides in order.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

/// Writes config.snapshot into `dir` (created when missing) and returns its path.
std::filesystem::path write_snapshot(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace groundlab::cli
