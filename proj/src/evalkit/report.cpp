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

#include "groundlab/evalkit/report.hpp"

#include <cstdio>
#include <sstream>
#include <system_error>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"

namespace groundlab::evalkit {

namespace {

constexpr const char* kRecordFormat = "groundlab-metrics";

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

nlohmann::json report_record(std::span<const MetricsReport> reports, const nlohmann::json& meta) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return {{"format", kRecordFormat},
          {"version", kReportVersion},
          {"meta", meta.is_null() ? nlohmann::json::object() : meta},
          {"reports", arr}};
}

std::vector<MetricsReport> parse_report_record(const nlohmann::json& record) {
  if (record.value("format", "") != kRecordFormat || record.value("version", -1) != kReportVersion) {
    throw Error(Errc::version_mismatch, "not a version " + std::to_string(kReportVersion) + " metrics record");
  }
  std::vector<MetricsReport> out;
  for (const auto& r : record.at("reports")) out.push_back(MetricsReport::from_json(r));
  return out;
}

std::string overall_table(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os << "model\tsplit\tn\tmIoU";
  if (!reports.empty()) {
    for (double x : reports.front().config.thresholds) os << "\tP@" << shortest(x);
  }
  os << "\n";
  for (const auto& r : reports) {
    os << r.identity.tag << '\t' << r.split << '\t' << r.n << '\t' << pct(r.mean_iou);
    for (double p : r.precision) os << '\t' << fixed2(p);
    os << "\n";
  }
  return os.str();
}

std::string bucket_table(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os << "model\tsplit\tA=1\tA=2\tA=3\tA=4\toverall\n";
  for (const auto& r : reports) {
    os << r.identity.tag << '\t' << r.split;
    for (const auto& b : r.buckets) os << '\t' << (b.mean_iou ? pct(*b.mean_iou) : std::string("-"));
    os << '\t' << pct(r.mean_iou) << "\n";
  }
  return os.str();
}

std::string attribute_plot_data(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  os << "model,split,attributes,mean_iou,count\n";
  for (const auto& r : reports) {
    for (const auto& b : r.buckets) {
      os << r.identity.tag << ',' << r.split << ',' << b.attributes << ','
         << (b.mean_iou ? fixed6(*b.mean_iou) : std::string()) << ',' << b.count << "\n";
    }
  }
  return os.str();
}

ReportFiles emit_report(std::span<const MetricsReport> reports, const std::filesystem::path& directory,
                        const nlohmann::json& meta) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + directory.string() + ": " + ec.message());
  ReportFiles f{directory / "metrics.json", directory / "table_overall.tsv", directory / "table_attributes.tsv",
                directory / "plot_attributes.csv"};
  write_text(f.record, report_record(reports, meta).dump(2) + "\n");
  write_text(f.overall, overall_table(reports));
  write_text(f.buckets, bucket_table(reports));
  write_text(f.plot, attribute_plot_data(reports));
  return f;
}

std::vector<std::vector<std::string>> parse_tsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace groundlab::evalkit
