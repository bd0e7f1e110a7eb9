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

#include "groundlab/scenegen/dataset_io.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/core/hash.hpp"

namespace groundlab::scenegen {

namespace fs = std::filesystem;
using nlohmann::json;

std::string encode_rle(const std::vector<Mask>& masks) {
  const int h = masks.empty() ? 0 : masks.front().height;
  const int w = masks.empty() ? 0 : masks.front().width;
  std::string out = "RLE1 " + std::to_string(h) + " " + std::to_string(w) + " " +
                    std::to_string(masks.size()) + "\n";
  for (const auto& m : masks) {
    if (m.height != h || m.width != w) throw Error(Errc::shape_mismatch, "rle: masks differ in shape");
    std::uint8_t current = 0;
    std::size_t run = 0;
    bool first = true;
    for (auto b : m.bits) {
      if (b == current) {
        ++run;
        continue;
      }
      out += (first ? "" : " ") + std::to_string(run);
      first = false;
      current = b;
      run = 1;
    }
    out += (first ? "" : " ") + std::to_string(run) + "\n";
  }
  return out;
}

std::vector<Mask> decode_rle(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int h = 0, w = 0;
  std::size_t count = 0;
  if (!(in >> magic >> h >> w >> count) || magic != "RLE1") {
    throw Error(Errc::io_error, "rle: bad header");
  }
  std::string line;
  std::getline(in, line);
  std::vector<Mask> masks;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error(Errc::io_error, "rle: truncated");
    Mask m(h, w);
    std::istringstream runs(line);
    std::size_t pos = 0, run = 0;
    std::uint8_t value = 0;
    while (runs >> run) {
      if (pos + run > m.bits.size()) throw Error(Errc::io_error, "rle: run overflow");
      std::fill_n(m.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
      pos += run;
      value ^= 1;
    }
    if (pos != m.bits.size()) throw Error(Errc::io_error, "rle: run lengths do not cover the mask");
    masks.push_back(std::move(m));
  }
  return masks;
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

Image decode_ppm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  if (!(in >> magic >> w >> h >> maxval) || magic != "P6" || maxval != 255) {
    throw Error(Errc::io_error, "ppm: bad header");
  }
  in.get();
  Image img(h, w);
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - offset != img.rgb.size()) throw Error(Errc::io_error, "ppm: truncated");
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end(), img.rgb.begin());
  return img;
}

namespace {

std::string id_name(const char* prefix, int id, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%07d.%s", prefix, id, ext);
  return buf;
}

json scene_record(const Scene& s) {
  json j{{"id", s.id},
         {"height", s.height},
         {"width", s.width},
         {"clutter_level", s.clutter_level},
         {"lighting", std::string(to_string(s.lighting))},
         {"master_seed", s.master_seed},
         {"objects", json::array()}};
  for (const auto& o : s.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"category", o.category.name},
                            {"color", std::string(to_string(o.color))},
                            {"shape", std::string(to_string(o.shape))},
                            {"size", std::string(to_string(o.size))},
                            {"cx", o.center.x},
                            {"cy", o.center.y},
                            {"radius", o.radius},
                            {"vertical", o.vertical},
                            {"z", o.z_order}});
  }
  return j;
}

Scene scene_from_record(const json& j, const Catalog& catalog) {
  Scene s;
  s.id = j.at("id").get<int>();
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.clutter_level = j.at("clutter_level").get<int>();
  const auto lighting = parse_lighting(j.at("lighting").get<std::string>());
  if (!lighting) throw Error(Errc::unknown_attribute, "unknown lighting");
  s.lighting = *lighting;
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& jo : j.at("objects")) {
    SceneObject o;
    o.id = jo.at("id").get<int>();
    const ObjectCategory* cat = catalog.find(jo.at("category").get<std::string>());
    if (cat == nullptr) throw Error(Errc::unknown_attribute, "unknown category in scene record");
    o.category = *cat;
    const auto color = parse_color(jo.at("color").get<std::string>());
    const auto shape = parse_shape(jo.at("shape").get<std::string>());
    const auto size = parse_size(jo.at("size").get<std::string>());
    if (!color || !shape || !size) throw Error(Errc::unknown_attribute, "bad object attributes");
    o.color = *color;
    o.shape = *shape;
    o.size = *size;
    o.center = {jo.at("cx").get<double>(), jo.at("cy").get<double>()};
    o.radius = jo.at("radius").get<double>();
    o.vertical = jo.at("vertical").get<bool>();
    o.z_order = jo.at("z").get<int>();
    s.objects.push_back(std::move(o));
  }
  return s;
}

struct Writer {
  fs::path root;
  json checksums = json::object();

  void put(const std::string& rel, const std::string& bytes) {
    write_text(root / rel, bytes);
    checksums[rel] = sha256_hex(bytes);
  }
};

}  // namespace

void persist_dataset(const DatasetSplit& split, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory / "images", ec);
  fs::create_directories(directory / "masks", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + directory.string());
  Writer w{directory};

  std::string scenes_jsonl;
  for (const auto& s : split.scenes) {
    scenes_jsonl += scene_record(s).dump() + "\n";
    std::vector<Mask> masks;
    for (const auto& o : s.objects) masks.push_back(o.gt_mask);
    w.put("masks/" + id_name("scene", s.id, "rle"), encode_rle(masks));
  }
  w.put("scenes.jsonl", scenes_jsonl);

  std::string queries_jsonl;
  std::vector<int> written_images;
  for (auto name : {SplitName::train, SplitName::test_seen, SplitName::test_unseen}) {
    for (const auto& s : split.split(name)) {
      const std::string image_rel = "images/" + id_name("scene", s.scene_id, "ppm");
      const std::string mask_rel = "masks/" + id_name("sample", s.sample_id, "rle");
      json rec{{"sample_id", s.sample_id},
               {"split", std::string(to_string(s.split))},
               {"scene_id", s.scene_id},
               {"text", s.query.text},
               {"template_id", s.query.template_id},
               {"target_id", s.query.target_id},
               {"attributes", to_json(s.query.attributes)},
               {"image", image_rel},
               {"mask", mask_rel}};
      queries_jsonl += rec.dump() + "\n";
      if (!w.checksums.contains(image_rel)) w.put(image_rel, encode_ppm(s.image));
      w.put(mask_rel, encode_rle({s.gt_mask}));
    }
  }
  w.put("queries.jsonl", queries_jsonl);

  json catalog = json::array();
  for (const auto& c : split.catalog.categories()) {
    catalog.push_back({{"name", c.name}, {"glyph", c.glyph}, {"seen", c.seen}});
  }
  json index{{"format", "groundlab-dataset"},
             {"version", kDatasetFormatVersion},
             {"config", split.config.to_json()},
             {"catalog", catalog},
             {"vocabulary", split.vocabulary},
             {"content_hash", split.content_hash()},
             {"files", w.checksums}};
  write_text(directory / "index.json", index.dump(2) + "\n");
}

DatasetSplit load_dataset(const fs::path& directory) {
  const fs::path index_path = directory / "index.json";
  if (!fs::exists(index_path)) throw Error(Errc::missing_index, index_path.string());
  json index;
  try {
    index = json::parse(read_text(index_path));
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, "index.json: " + std::string(e.what()));
  }
  if (index.value("format", "") != "groundlab-dataset" || index.value("version", -1) != kDatasetFormatVersion) {
    throw Error(Errc::version_mismatch, "expected groundlab-dataset v" + std::to_string(kDatasetFormatVersion));
  }

  std::map<std::string, std::string> files;
  for (const auto& [rel, sum] : index.at("files").items()) {
    const fs::path p = directory / rel;
    if (!fs::exists(p)) throw Error(Errc::missing_file, rel);
    std::string bytes = read_text(p);
    if (sha256_hex(bytes) != sum.get<std::string>()) throw Error(Errc::checksum_mismatch, rel);
    files.emplace(rel, std::move(bytes));
  }
  const auto file = [&](const std::string& rel) -> const std::string& {
    auto it = files.find(rel);
    if (it == files.end()) throw Error(Errc::missing_file, rel);
    return it->second;
  };

  DatasetSplit out;
  std::vector<ObjectCategory> cats;
  for (const auto& c : index.at("catalog")) {
    cats.push_back({c.at("name").get<std::string>(), c.at("glyph").get<int>(), c.at("seen").get<bool>()});
  }
  out.catalog = Catalog(std::move(cats));
  out.vocabulary = index.at("vocabulary").get<std::vector<std::string>>();
  out.config = DatasetConfig::from_json(index.at("config"));

  std::istringstream scenes_in(file("scenes.jsonl"));
  std::string line;
  while (std::getline(scenes_in, line)) {
    if (line.empty()) continue;
    Scene s = scene_from_record(json::parse(line), out.catalog);
    auto masks = decode_rle(file("masks/" + id_name("scene", s.id, "rle")));
    if (masks.size() != s.objects.size()) throw Error(Errc::io_error, "scene mask count mismatch");
    for (std::size_t i = 0; i < masks.size(); ++i) s.objects[i].gt_mask = std::move(masks[i]);
    out.scenes.push_back(std::move(s));
  }
  std::sort(out.scenes.begin(), out.scenes.end(), [](const Scene& a, const Scene& b) { return a.id < b.id; });

  std::istringstream queries_in(file("queries.jsonl"));
  while (std::getline(queries_in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    LabeledSample s;
    s.sample_id = rec.at("sample_id").get<int>();
    s.scene_id = rec.at("scene_id").get<int>();
    const std::string split_name = rec.at("split").get<std::string>();
    s.query.text = rec.at("text").get<std::string>();
    s.query.template_id = rec.at("template_id").get<int>();
    s.query.target_id = rec.at("target_id").get<int>();
    s.query.attributes = attributes_from_json(rec.at("attributes"));
    s.image = decode_ppm(file(rec.at("image").get<std::string>()));
    auto gt = decode_rle(file(rec.at("mask").get<std::string>()));
    if (gt.size() != 1) throw Error(Errc::io_error, "sample mask file must hold one mask");
    s.gt_mask = std::move(gt.front());
    if (split_name == "train") {
      s.split = SplitName::train;
      out.train.push_back(std::move(s));
    } else if (split_name == "test_seen") {
      s.split = SplitName::test_seen;
      out.test_seen.push_back(std::move(s));
    } else if (split_name == "test_unseen") {
      s.split = SplitName::test_unseen;
      out.test_unseen.push_back(std::move(s));
    } else {
      throw Error(Errc::io_error, "unknown split " + split_name);
    }
  }
  if (out.content_hash() != index.at("content_hash").get<std::string>()) {
    throw Error(Errc::checksum_mismatch, "content_hash (index.json)");
  }
  return out;
}

}  // namespace groundlab::scenegen
