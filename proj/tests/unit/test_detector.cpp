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
#include "groundlab/detector/detector.hpp"
#include "groundlab/evalkit/metrics.hpp"
#include "groundlab/kernels/kernels.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::detector;

namespace {

const scenegen::Catalog& cat() {
  static const auto c = scenegen::Catalog::standard();
  return c;
}

scenegen::SceneObject disc(int id, const std::string& category, scenegen::Color color, double cx, double cy, double r) {
  scenegen::SceneObject o;
  o.id = id;
  o.category = *cat().find(category);
  o.color = color;
  o.center = {cx, cy};
  o.radius = r;
  o.gt_mask = Mask(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) o.gt_mask.at(y, x) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
  }
  return o;
}

scenegen::Scene scene_of(std::vector<scenegen::SceneObject> objects) {
  scenegen::Scene s;
  s.height = s.width = 64;
  s.objects = std::move(objects);
  return s;
}

DetectorConfig exact() {
  DetectorConfig c;
  c.max_radius = 0;
  c.score_noise = 0.0;
  c.category_recall = 1.0;
  return c;
}

}  // namespace

TEST_CASE("head noun is the first catalog word") {
  CHECK(head_noun("the red apple next to the cup", cat()) == "apple");
  CHECK(head_noun("Grab the BOWL", cat()) == "bowl");
  CHECK(!head_noun("the shiny thing", cat()).has_value());
}

TEST_CASE("single target is found exactly") {
  const auto s = scene_of({disc(0, "apple", scenegen::Color::red, 20, 20, 8), disc(1, "cup", scenegen::Color::blue, 45, 45, 8)});
  Rng rng(1);
  const auto c = detect_topk(s, "the apple", exact(), rng, cat());
  REQUIRE(c.size() == 1);
  CHECK(c[0].source_object == 0);
  CHECK(c[0].mask == s.objects[0].gt_mask);
}

TEST_CASE("same-category candidates are ranked by area and ignore attributes") {
  const auto s = scene_of({disc(0, "apple", scenegen::Color::red, 12, 12, 5),
                           disc(1, "apple", scenegen::Color::green, 40, 14, 9),
                           disc(2, "apple", scenegen::Color::blue, 22, 44, 7)});
  Rng a(2), b(2);
  const auto red = detect_topk(s, "the red apple", exact(), a, cat());
  const auto blue = detect_topk(s, "the blue apple", exact(), b, cat());
  REQUIRE(red.size() == 3);
  CHECK(red[0].source_object == 1);
  CHECK(red[1].source_object == 2);
  CHECK(red[2].source_object == 0);
  CHECK(red[0].score == doctest::Approx(1.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(red[i] == blue[i]);
  auto k1 = exact();
  k1.top_k = 1;
  Rng c(2);
  CHECK(detect_topk(s, "apple", k1, c, cat()).size() == 1);
}

TEST_CASE("unknown noun falls back to the largest objects") {
  const auto s = scene_of({disc(0, "apple", scenegen::Color::red, 12, 12, 5), disc(1, "cup", scenegen::Color::green, 40, 40, 10)});
  Rng rng(3);
  const auto c = detect_topk(s, "the gizmo", exact(), rng, cat());
  REQUIRE(!c.empty());
  CHECK(c[0].source_object == 1);
}

TEST_CASE("top-1 success on L identical instances is near 1/L") {
  DetectorConfig cfg = exact();
  cfg.score_noise = 0.1;
  for (int L : {2, 3, 4}) {
    std::vector<scenegen::SceneObject> objs;
    for (int i = 0; i < L; ++i) objs.push_back(disc(i, "apple", scenegen::Color::red, 8 + 15 * i, 32, 6));
    const auto s = scene_of(objs);
    Rng rng(100 + L);
    double total = 0.0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
      const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
      const auto c = detect_topk(s, "apple", cfg, rng, cat());
      total += evalkit::iou(c.front().mask, s.objects[static_cast<std::size_t>(target)].gt_mask);
    }
    CHECK(std::abs(total / trials - 1.0 / L) < 0.05);
  }
}

TEST_CASE("category confusion switches to another present category") {
  auto cfg = exact();
  cfg.category_recall = 0.0;
  const auto s = scene_of({disc(0, "apple", scenegen::Color::red, 12, 12, 5), disc(1, "cup", scenegen::Color::green, 40, 40, 8)});
  Rng rng(4);
  const auto c = detect_topk(s, "apple", cfg, rng, cat());
  REQUIRE(c.size() == 1);
  CHECK(c[0].source_object == 1);
}

TEST_CASE("perturbation respects radius zero and the IoU floor") {
  Rng rng(5);
  auto cfg = exact();
  const Mask m = disc(0, "apple", scenegen::Color::red, 30, 30, 10).gt_mask;
  CHECK(perturb_mask(m, cfg, rng) == m);
  Mask full(16, 16);
  full.bits.assign(full.bits.size(), 1);
  CHECK(kernels::serial::erode(full, 1).area() < full.area());
  cfg.max_radius = 3;
  for (int t = 0; t < 500; ++t) {
    const Mask src = disc(0, "apple", scenegen::Color::red, rng.uniform(15, 49), rng.uniform(15, 49), rng.uniform(2, 12)).gt_mask;
    const Mask p = perturb_mask(src, cfg, rng);
    CHECK(evalkit::iou(p, src) >= cfg.iou_floor);
  }
}

TEST_CASE("detection is deterministic in the rng stream") {
  auto cfg = DetectorConfig{};
  const auto s = scene_of({disc(0, "apple", scenegen::Color::red, 12, 12, 5), disc(1, "apple", scenegen::Color::green, 40, 40, 8)});
  Rng a(9), b(9);
  const auto x = detect_topk(s, "apple", cfg, a, cat());
  const auto y = detect_topk(s, "apple", cfg, b, cat());
  CHECK(x == y);
  auto bad = cfg;
  bad.top_k = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(DetectorConfig::from_json(cfg.to_json()) == cfg);
}

TEST_CASE("hybrid picks the best overlap") {
  // Reference covers columns 0..9 of a 1x10 strip; candidates cover prefixes of it.
  Mask ref(1, 10);
  ref.bits.assign(10, 1);
  std::vector<DetectionCandidate> c(3);
  const int widths[3] = {2, 7, 4};
  for (int i = 0; i < 3; ++i) {
    c[i].mask = Mask(1, 10);
    for (int x = 0; x < widths[i]; ++x) c[i].mask.bits[x] = 1;
  }
  const auto got = hybrid_select(ref, c);
  CHECK(got.chosen == 1);
  CHECK(got.overlap == doctest::Approx(0.7));
  CHECK(got.warning.empty());
}

TEST_CASE("hybrid falls back on disjoint or empty candidate lists") {
  Mask ref(4, 4);
  ref.at(0, 0) = 1;
  std::vector<DetectionCandidate> c(2);
  c[0].mask = Mask(4, 4);
  c[0].mask.at(3, 3) = 1;
  c[1].mask = Mask(4, 4);
  const auto got = hybrid_select(ref, c);
  CHECK(got.chosen == -1);
  CHECK(got.mask == ref);
  CHECK(!got.warning.empty());
  const auto none = hybrid_select(ref, {});
  CHECK(none.chosen == -1);
  CHECK(!none.warning.empty());
}

TEST_CASE("hybrid selection agrees with brute force") {
  const auto r = checks::hybrid_selection();
  INFO(r.detail);
  CHECK(r.pass);
}
