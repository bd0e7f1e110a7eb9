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

#include <array>
#include <cstdio>
#include <map>
#include <set>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/scenegen/attributes.hpp"
#include "groundlab/scenegen/dataset.hpp"
#include "groundlab/scenegen/dataset_io.hpp"
#include "groundlab/scenegen/mrq.hpp"
#include "groundlab/scenegen/query.hpp"
#include "groundlab/scenegen/render.hpp"
#include "groundlab/scenegen/scene.hpp"
#include "checks.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::scenegen;

namespace {

const Catalog& cat() {
  static const Catalog c = Catalog::standard();
  return c;
}

SceneObject make_object(int id, const std::string& category, Color color, double x, double y,
                        double radius = 10.0, int z = 0) {
  SceneObject o;
  o.id = id;
  o.category = *cat().find(category);
  o.color = color;
  o.shape = ShapeDescriptor::round;
  o.size = radius > 12 ? SizeClass::large : SizeClass::small;
  o.center = {x, y};
  o.radius = radius;
  o.z_order = z;
  return o;
}

Scene finish(Scene s) {
  const auto masks = visible_masks(s.objects, s.height, s.width);
  for (std::size_t i = 0; i < s.objects.size(); ++i) s.objects[i].gt_mask = masks[i];
  return s;
}

int area(const Mask& m) {
  int a = 0;
  for (auto b : m.bits) a += b;
  return a;
}

DatasetConfig small_config(int train, int seen, int unseen) {
  DatasetConfig c;
  c.n_train = train;
  c.n_test_seen = seen;
  c.n_test_unseen = unseen;
  return c;
}

}  // namespace

TEST_CASE("clutter level 1 gives one object per category") {
  SceneConfig c;
  c.categories = {"apple", "banana", "cup", "box", "pen"};
  c.clutter_level = 1;
  const auto s = generate_scene(c, 7, cat());
  CHECK(s.objects.size() == 5);
  std::set<std::string> names;
  for (const auto& o : s.objects) names.insert(o.category.name);
  CHECK(names.size() == 5);
}

TEST_CASE("clutter level 3 gives three objects per category") {
  SceneConfig c;
  c.categories = {"apple", "banana", "cup", "box", "pen"};
  c.clutter_level = 3;
  const auto s = generate_scene(c, 7, cat());
  CHECK(s.objects.size() == 15);
  std::map<std::string, int> per;
  for (const auto& o : s.objects) ++per[o.category.name];
  for (const auto& [k, v] : per) CHECK(v == 3);
}

TEST_CASE("scene generation is deterministic") {
  SceneConfig c;
  c.categories = {"apple", "cup", "ball"};
  c.clutter_level = 2;
  CHECK(serialize_scene(generate_scene(c, 11, cat())) == serialize_scene(generate_scene(c, 11, cat())));
  CHECK(serialize_scene(generate_scene(c, 11, cat())) != serialize_scene(generate_scene(c, 12, cat())));
}

TEST_CASE("generated masks are disjoint and respect the occlusion limit") {
  SceneConfig c;
  c.categories = {"apple", "cup", "ball", "box"};
  c.clutter_level = 3;
  const auto s = generate_scene(c, 3, cat());
  std::vector<int> owner(static_cast<std::size_t>(s.height * s.width), -1);
  for (const auto& o : s.objects) {
    const auto fp = footprint(o, s.height, s.width);
    CHECK(area(o.gt_mask) >= 0.5 * area(fp) - 1e-9);
    for (std::size_t i = 0; i < o.gt_mask.bits.size(); ++i) {
      if (!o.gt_mask.bits[i]) continue;
      CHECK(fp.bits[i] == 1);
      CHECK(owner[i] == -1);
      owner[i] = o.id;
    }
  }
}

TEST_CASE("single object renders one nonempty mask") {
  Scene s;
  s.objects.push_back(make_object(0, "cup", Color::red, 64, 64));
  s = finish(s);
  const auto r = render(s);
  REQUIRE(r.masks.size() == 1);
  CHECK(area(r.masks[0]) > 0);
  CHECK(r.image.height == 128);
  CHECK(r.image.width == 128);
}

TEST_CASE("the upper object hides the lower one") {
  Scene s;
  s.objects.push_back(make_object(0, "ball", Color::red, 60, 64, 12, 0));
  s.objects.push_back(make_object(1, "ball", Color::blue, 70, 64, 12, 1));
  const auto masks = visible_masks(s.objects, 128, 128);
  const auto fp_b = footprint(s.objects[0], 128, 128);
  for (std::size_t i = 0; i < masks[0].bits.size(); ++i) CHECK(!(masks[0].bits[i] && masks[1].bits[i]));
  CHECK(area(masks[0]) < area(fp_b));
  CHECK(area(masks[1]) == area(footprint(s.objects[1], 128, 128)));
}

TEST_CASE("empty scene renders background only") {
  SceneConfig c;
  c.allow_empty = true;
  const auto s = generate_scene(c, 1, cat());
  CHECK(s.objects.empty());
  const auto r = render(s);
  CHECK(r.masks.empty());
  CHECK(r.image.rgb.size() == 128u * 128u * 3u);
}

TEST_CASE("match_objects on two apples") {
  Scene s;
  s.objects.push_back(make_object(0, "apple", Color::red, 20, 64));
  s.objects.push_back(make_object(1, "apple", Color::green, 108, 64));
  s = finish(s);
  AttributeSet red{"apple", Color::red, {}, {}, {}};
  CHECK(match_objects(s, red, cat()) == std::set<int>{0});
  AttributeSet any{"apple", {}, {}, {}, {}};
  CHECK(match_objects(s, any, cat()) == std::set<int>{0, 1});
  AttributeSet none{"apple", Color::red, {}, {}, Position{PositionKind::right, ""}};
  CHECK(match_objects(s, none, cat()).empty());
  AttributeSet bogus{"zorp", {}, {}, {}, {}};
  CHECK_THROWS_AS(match_objects(s, bogus, cat()), Error);
}

TEST_CASE("query generation covers singleton, distractor and ambiguous cases") {
  Rng rng(1);
  Scene lone;
  lone.objects.push_back(make_object(0, "cup", Color::blue, 64, 64));
  lone = finish(lone);
  const auto q = generate_query(lone, 0, 1, rng, cat());
  CHECK(q.attributes.count() == 1);
  CHECK(q.attributes.object == "cup");
  CHECK(q.text.find("cup") != std::string::npos);

  Scene pair;
  pair.objects.push_back(make_object(0, "apple", Color::red, 20, 64));
  pair.objects.push_back(make_object(1, "apple", Color::red, 108, 64));
  pair = finish(pair);
  const auto q2 = generate_query(pair, 1, 2, rng, cat());
  CHECK(q2.attributes.count() == 2);
  REQUIRE(q2.attributes.position.has_value());
  CHECK(match_objects(pair, q2.attributes, cat()) == std::set<int>{1});
  CHECK_THROWS_AS(generate_query(pair, 0, 1, rng, cat()), Error);
}

TEST_CASE("query text renders deterministically") {
  AttributeSet a{"pen", Color::blue, {}, {}, Position{PositionKind::right, ""}};
  for (int t = 0; t < kTemplateCount; ++t) CHECK(render_query_text(a, t) == render_query_text(a, t));
}

TEST_CASE("mrq on the documented cases") {
  Scene lone;
  lone.objects.push_back(make_object(0, "cup", Color::blue, 64, 64));
  lone = finish(lone);
  const auto m = compute_mrq(lone, 0, cat());
  CHECK(m.count() == 1);
  CHECK(m.object == "cup");

  Scene two;
  two.objects.push_back(make_object(0, "apple", Color::red, 40, 64));
  two.objects.push_back(make_object(1, "apple", Color::green, 80, 64));
  two = finish(two);
  const auto m2 = compute_mrq(two, 0, cat());
  CHECK(m2.count() == 2);
  REQUIRE(m2.color.has_value());
  CHECK(*m2.color == Color::red);
}

TEST_CASE("mrq size matches brute-force enumeration on 100 scenes") {
  const auto ds = build_dataset(small_config(100, 4, 4));
  int checked = 0;
  for (const auto& smp : ds.train) {
    const auto& scene = ds.scene(smp.scene_id);
    const auto& target = *scene.object(smp.query.target_id);
    const int oracle = checks::brute_force_mrq(scene, target);
    if (oracle == 0) {
      CHECK_THROWS_AS(compute_mrq(scene, target.id, ds.catalog), Error);
    } else {
      const auto m = compute_mrq(scene, target.id, ds.catalog);
      CHECK(m.count() == oracle);
      CHECK(match_objects(scene, m, ds.catalog) == std::set<int>{target.id});
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("dataset splits have the configured sizes and partition") {
  const auto ds = build_dataset(small_config(80, 40, 40));
  CHECK(ds.train.size() == 80);
  CHECK(ds.test_seen.size() == 40);
  CHECK(ds.test_unseen.size() == 40);
  const std::set<std::string> unseen{"container", "sprayer", "wrench", "multimeter"};
  for (const auto& s : ds.test_unseen) CHECK(unseen.count(s.query.attributes.object) == 1);
  for (const auto* v : {&ds.train, &ds.test_seen}) {
    for (const auto& s : *v) {
      CHECK(unseen.count(s.query.attributes.object) == 0);
      // Scenes of seen splits never contain held-out categories.
      for (const auto& o : ds.scene(s.scene_id).objects) CHECK(unseen.count(o.category.name) == 0);
    }
  }
  for (const auto* v : {&ds.train, &ds.test_seen, &ds.test_unseen}) {
    for (const auto& s : *v) {
      CHECK(match_objects(ds.scene(s.scene_id), s.query.attributes, ds.catalog) ==
            std::set<int>{s.query.target_id});
      CHECK(s.gt_mask == ds.scene(s.scene_id).object(s.query.target_id)->gt_mask);
    }
  }
}

TEST_CASE("attribute buckets of test_seen are close to uniform") {
  const auto ds = build_dataset(small_config(8, 200, 8));
  std::array<int, 5> hist{};
  for (const auto& s : ds.test_seen) ++hist[static_cast<std::size_t>(s.query.attributes.count())];
  for (int a = 1; a <= 4; ++a) CHECK(std::abs(hist[a] - 50) <= 5);
}

TEST_CASE("assign_buckets follows the mixture") {
  const auto b = assign_buckets(8, {0.25, 0.25, 0.25, 0.25});
  CHECK(b == std::vector<int>{1, 2, 3, 4, 1, 2, 3, 4});
  const auto c = assign_buckets(10, {1.0, 0.0, 0.0, 0.0});
  for (int x : c) CHECK(x == 1);
}

TEST_CASE("dataset generation is deterministic") {
  const auto a = build_dataset(small_config(20, 8, 8));
  const auto b = build_dataset(small_config(20, 8, 8));
  CHECK(a.content_hash() == b.content_hash());
  auto cfg = small_config(20, 8, 8);
  cfg.master_seed = 99;
  CHECK(build_dataset(cfg).content_hash() != a.content_hash());
}

TEST_CASE("persist and load round trip") {
  const auto ds = build_dataset(small_config(30, 10, 10));
  const auto dir = test::scratch_dir("dataset_rt");
  persist_dataset(ds, dir);
  const auto back = load_dataset(dir);
  CHECK(back == ds);
  CHECK(back.content_hash() == ds.content_hash());
}

TEST_CASE("corrupt mask file is reported by name") {
  const auto ds = build_dataset(small_config(10, 4, 4));
  const auto dir = test::scratch_dir("dataset_corrupt");
  persist_dataset(ds, dir);
  char name[64];
  std::snprintf(name, sizeof name, "sample_%07d.rle", ds.train.front().sample_id);
  const auto victim = dir / "masks" / name;
  REQUIRE(std::filesystem::exists(victim));
  write_text(victim, read_text(victim) + "0\n");
  try {
    load_dataset(dir);
    FAIL("expected checksum-mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::checksum_mismatch);
    CHECK(std::string(e.what()).find(victim.filename().string()) != std::string::npos);
  }
}

TEST_CASE("loading an empty directory fails with missing-index") {
  const auto dir = test::scratch_dir("dataset_empty");
  try {
    load_dataset(dir);
    FAIL("expected missing-index");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_index);
  }
}

TEST_CASE("rle and ppm codecs round trip") {
  Rng rng(8);
  std::vector<Mask> masks{test::random_mask(rng, 9, 7, 0.4), test::random_mask(rng, 9, 7, 0.0),
                          test::random_mask(rng, 9, 7, 1.0)};
  CHECK(decode_rle(encode_rle(masks)) == masks);
  Image im(5, 6);
  for (auto& v : im.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  const auto back = decode_ppm(encode_ppm(im));
  CHECK(back.rgb == im.rgb);
  CHECK(back.height == 5);
}

TEST_CASE("positions and attribute json") {
  for (const char* p : {"left", "right", "top", "bottom", "center", "left-of:cup", "below:apple"}) {
    CHECK(Position::parse(p).str() == p);
  }
  CHECK_THROWS_AS(Position::parse("sideways"), Error);
  AttributeSet a{"apple", Color::red, ShapeDescriptor::star, SizeClass::large, Position{PositionKind::left, ""}};
  CHECK(a.count() == 5);
  CHECK(attributes_from_json(to_json(a)) == a);
}
