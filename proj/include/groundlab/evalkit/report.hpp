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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/evalkit/evaluate.hpp"

namespace groundlab::evalkit {

/// Versioned record holding every report plus caller metadata.
nlohmann::json report_record(std::span<const MetricsReport> reports, const nlohmann::json& meta = {});
/// Inverse of report_record. Throws version-mismatch on a foreign record.
std::vector<MetricsReport> parse_report_record(const nlohmann::json& record);

/// model, split, n, mIoU and P@X columns (percent, two decimals).
std::string overall_table(std::span<const MetricsReport> reports);
/// model, split, then mean IoU for A = 1..4 and overall (percent, two decimals).
std::string bucket_table(std::span<const MetricsReport> reports);
/// CSV rows model,split,attributes,mean_iou,count; four rows per report.
std::string attribute_plot_data(std::span<const MetricsReport> reports);

struct ReportFiles {
  std::filesystem::path record;  // metrics.json
  std::filesystem::path overall;  // table_overall.tsv
  std::filesystem::path buckets;  // table_attributes.tsv
  std::filesystem::path plot;     // plot_attributes.csv
};

/// Writes all four files. Byte-stable for equal inputs. Throws io-error when
/// the directory cannot be created or written.
ReportFiles emit_report(std::span<const MetricsReport> reports, const std::filesystem::path& directory,
                        const nlohmann::json& meta = {});

/// Tab-separated rows, header included.
std::vector<std::vector<std::string>> parse_tsv(const std::string& text);

}  // namespace groundlab::evalkit
