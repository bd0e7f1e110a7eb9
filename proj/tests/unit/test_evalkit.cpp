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

#include <fstream>
#include <map>
#include <sstream>

#include "checks.hpp"
#include "groundlab/evalkit/attributes.hpp"
#include "groundlab/evalkit/evaluate.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/evalkit/predictors.hpp"
#include "groundlab/evalkit/report.hpp"
#include "groundlab/evalkit/sa.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::evalkit;

namespace {

const scenegen::DatasetSplit& data() {
  static const auto d = checks::small_dataset(80, 11);
  return d;
}

ModelIdentity ident(const std::string& tag) {
  return {tag, "", data().content_hash(), 11};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("iou and precision worked examples") {
  Mask a(1, 4), b(1, 4);
  a.bits = {1, 1, 1, 0};
  b.bits = {0, 1, 1, 1};
  CHECK(iou(a, b) == doctest::Approx(0.5));
  Mask c(2, 4), d(2, 4);
  c.bits = {1, 1, 1, 1, 0, 0, 0, 0};
  d.bits = {0, 0, 1, 1, 1, 1, 0, 0};
  CHECK(iou(c, d) == doctest::Approx(2.0 / 6.0));
  CHECK(iou(Mask(3, 3), Mask(3, 3)) == 1.0);
  CHECK_THROWS_AS(iou(Mask(2, 2), Mask(2, 3)), Error);
  const std::vector<double> ious{0.9, 0.55, 0.3};
  CHECK(precision_at(ious, 50) == doctest::Approx(200.0 / 3.0));
  CHECK(precision_at(ious, 90) == 0.0);  // strict inequality
  CHECK_THROWS_AS(precision_at({}, 50), Error);
  CHECK_THROWS_AS(precision_at(ious, 100), Error);
}

TEST_CASE("metric oracles, monotone precision and the empty rule") {
  const auto r = checks::metric_oracles();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("metrics config validation") {
  MetricsConfig c;
  c.validate();
  CHECK(MetricsConfig::from_json(c.to_json()) == c);
  c.thresholds = {60, 50};
  CHECK_THROWS_AS(c.validate(), Error);
  c.thresholds = {0, 50};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("attribute extraction examples") {
  const auto cat = scenegen::Catalog::standard();
  const auto a = extract_attributes("Please grab the blue pen on the right side", cat);
  CHECK(a.object == "pen");
  CHECK(a.color == scenegen::Color::blue);
  REQUIRE(a.position.has_value());
  CHECK(a.position->kind == scenegen::PositionKind::right);
  CHECK(!a.shape.has_value());
  CHECK(a.count() == 3);
  const auto b = extract_attributes("where is the multimeter", cat);
  CHECK(b.object == "multimeter");
  CHECK(b.count() == 1);
  CHECK_THROWS_AS(extract_attributes("hand me that thing", cat), Error);
}

TEST_CASE("extraction round trips grammar text and MRQ matches brute force") {
  const auto r = checks::attributes_and_mrq();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("oracle and empty predictors bound the metrics") {
  const auto& d = data();
  const auto hi = evaluate(oracle_predictor(), d.train, "train", d.content_hash(), ident("oracle"), d.catalog);
  CHECK(hi.n == static_cast<int>(d.train.size()));
  CHECK(hi.mean_iou == 1.0);
  for (double p : hi.precision) CHECK(p == 100.0);
  const auto lo = evaluate(empty_predictor(), d.train, "train", d.content_hash(), ident("empty"), d.catalog);
  CHECK(lo.mean_iou == 0.0);
  for (double p : lo.precision) CHECK(p == 0.0);
  CHECK(std::is_sorted(lo.samples.begin(), lo.samples.end(),
                       [](const SampleScore& a, const SampleScore& b) { return a.sample_id < b.sample_id; }));
  CHECK_THROWS_AS(evaluate(oracle_predictor(), d.train, "train", "other", ident("oracle"), d.catalog), Error);
  CHECK_THROWS_AS(evaluate(oracle_predictor(), {}, "train", d.content_hash(), ident("oracle"), d.catalog), Error);
}

TEST_CASE("bucket means agree with an independent group-by") {
  const auto& d = data();
  Rng noise(7);
  std::map<int, double> scale;
  for (const auto& s : d.train) scale[s.sample_id] = noise.uniform();
  // Keep a random fraction of each ground-truth mask so IoU varies per sample.
  const Predictor partial = [&](const scenegen::LabeledSample& s) {
    Mask m = s.gt_mask;
    Rng r(static_cast<std::uint64_t>(s.sample_id));
    for (auto& b : m.bits) b = b && r.uniform() < scale.at(s.sample_id);
    return m;
  };
  const auto rep = evaluate(partial, d.train, "train", d.content_hash(), ident("partial"), d.catalog);
  std::map<int, std::pair<double, int>> groups;
  double total = 0.0;
  for (const auto& s : d.train) {
    const double v = iou(partial(s), s.gt_mask);
    auto& g = groups[s.query.attributes.count()];
    g.first += v;
    ++g.second;
    total += v;
  }
  CHECK(std::abs(rep.mean_iou - total / static_cast<double>(d.train.size())) < 1e-9);
  REQUIRE(rep.buckets.size() == 4);
  for (const auto& b : rep.buckets) {
    const auto it = groups.find(b.attributes);
    if (it == groups.end()) {
      CHECK(b.count == 0);
      CHECK(!b.mean_iou.has_value());
    } else {
      CHECK(b.count == it->second.second);
      REQUIRE(b.mean_iou.has_value());
      CHECK(std::abs(*b.mean_iou - it->second.first / it->second.second) < 1e-9);
    }
  }
  const auto from2 = rep.mean_iou_from(2);
  double s2 = 0.0;
  int n2 = 0;
  for (const auto& [a, g] : groups) {
    if (a >= 2) {
      s2 += g.first;
      n2 += g.second;
    }
  }
  if (n2 > 0) CHECK(std::abs(*from2 - s2 / n2) < 1e-9);
}

TEST_CASE("SA scoring") {
  scenegen::AttributeSet mrq{"apple", scenegen::Color::red, {}, {}, {}};
  auto with = [&](int extra) {
    auto a = mrq;
    if (extra >= 1) a.size = scenegen::SizeClass::large;
    if (extra >= 2) a.shape = scenegen::ShapeDescriptor::round;
    return a;
  };
  SaTrial t;
  t.mrq = mrq;
  t.attempts = {{with(0), "", 0.9, true}};
  CHECK(sa_score(t) == 100.0);
  t.attempts = {{with(0), "", 0.1, false}, {with(1), "", 0.2, false}, {with(2), "", 0.8, true}};
  CHECK(sa_score(t) == 50.0);
  t.attempts = {{with(0), "", 0.1, false}, {with(1), "", 0.2, false}, {with(2), "", 0.3, false}};
  CHECK(sa_score(t) == 0.0);
  const std::vector<SaTrial> two{t, t};
  CHECK(sa_score(two) == 0.0);
  t.attempts = {{with(1), "", 0.9, true}};
  CHECK_THROWS_AS(sa_score(t), Error);
  CHECK_THROWS_AS(sa_score(std::span<const SaTrial>{}), Error);
}

TEST_CASE("SA trials with ideal and blind segmenters") {
  const auto& d = data();
  int run = 0;
  for (const auto& s : d.train) {
    if (run == 5) break;
    const auto& scene = d.scene(s.scene_id);
    const int target = s.query.target_id;
    const auto* obj = scene.object(target);
    Rng a(1), b(1);
    try {
      const auto ideal = run_sa_trial(scene, target, [&](const std::string&) { return obj->gt_mask; }, a, d.catalog);
      CHECK(sa_score(ideal) == 100.0);
      CHECK(ideal.attempts.size() == 1);
      const auto blind = run_sa_trial(scene, target, [&](const std::string&) { return Mask(scene.height, scene.width); },
                                      b, d.catalog);
      CHECK(sa_score(blind) == 0.0);
      CHECK(blind.attempts.front().attributes == blind.mrq);
      for (std::size_t i = 1; i < blind.attempts.size(); ++i) {
        CHECK(blind.attempts[i].attributes.count() == blind.attempts[i - 1].attributes.count() + 1);
      }
      CHECK(to_json(blind).contains("attempts"));
      ++run;
    } catch (const Error& e) {
      CHECK(e.code() == Errc::indistinguishable);
    }
  }
  CHECK(run == 5);
}

TEST_CASE("reports are byte stable and parse back") {
  const auto& d = data();
  std::vector<MetricsReport> reps{
      evaluate(oracle_predictor(), d.test_seen, "test_seen", d.content_hash(), ident("oracle"), d.catalog),
      evaluate(empty_predictor(), d.test_unseen, "test_unseen", d.content_hash(), ident("empty"), d.catalog)};
  const auto dir1 = test::scratch_dir("report_a"), dir2 = test::scratch_dir("report_b");
  const auto f1 = emit_report(reps, dir1, {{"note", "x"}});
  const auto f2 = emit_report(reps, dir2, {{"note", "x"}});
  CHECK(slurp(f1.record) == slurp(f2.record));
  CHECK(slurp(f1.overall) == slurp(f2.overall));
  CHECK(slurp(f1.buckets) == slurp(f2.buckets));
  CHECK(slurp(f1.plot) == slurp(f2.plot));

  const auto rows = parse_tsv(slurp(f1.overall));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "oracle");
  CHECK(rows[1][3] == "100.00");

  std::istringstream plot(attribute_plot_data(reps));
  std::string line;
  int lines = 0;
  while (std::getline(plot, line)) ++lines;
  CHECK(lines == 1 + 4 * 2);

  const auto back = parse_report_record(report_record(reps));
  REQUIRE(back.size() == 2);
  CHECK(back[0] == reps[0]);
  CHECK(back[1] == reps[1]);
  auto bad = report_record(reps);
  bad["version"] = 99;
  CHECK_THROWS_AS(parse_report_record(bad), Error);
}
