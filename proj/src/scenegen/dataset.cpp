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

#include "groundlab/scenegen/dataset.hpp"

#include <algorithm>
#include <optional>

#include "groundlab/core/error.hpp"
#include "groundlab/core/hash.hpp"
#include "groundlab/core/random.hpp"
#include "groundlab/scenegen/mrq.hpp"
#include "groundlab/scenegen/render.hpp"

namespace groundlab::scenegen {

std::string_view to_string(SplitName s) {
  switch (s) {
    case SplitName::train: return "train";
    case SplitName::test_seen: return "test_seen";
    case SplitName::test_unseen: return "test_unseen";
  }
  return "?";
}

nlohmann::json DatasetConfig::to_json() const {
  return {{"master_seed", master_seed},
          {"image_size", image_size},
          {"n_train", n_train},
          {"n_test_seen", n_test_seen},
          {"n_test_unseen", n_test_unseen},
          {"unseen_categories", unseen_categories},
          {"attribute_mix", attribute_mix},
          {"min_categories", min_categories},
          {"max_categories", max_categories},
          {"attribute_share", attribute_share},
          {"max_scene_attempts", max_scene_attempts}};
}

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j) {
  DatasetConfig c;
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.image_size = j.at("image_size").get<int>();
  c.n_train = j.at("n_train").get<int>();
  c.n_test_seen = j.at("n_test_seen").get<int>();
  c.n_test_unseen = j.at("n_test_unseen").get<int>();
  c.unseen_categories = j.at("unseen_categories").get<std::vector<std::string>>();
  c.attribute_mix = j.at("attribute_mix").get<std::vector<double>>();
  c.min_categories = j.at("min_categories").get<int>();
  c.max_categories = j.at("max_categories").get<int>();
  c.attribute_share = j.at("attribute_share").get<std::vector<double>>();
  c.max_scene_attempts = j.at("max_scene_attempts").get<int>();
  return c;
}

const Scene& DatasetSplit::scene(int scene_id) const {
  auto it = std::lower_bound(scenes.begin(), scenes.end(), scene_id,
                             [](const Scene& s, int id) { return s.id < id; });
  if (it == scenes.end() || it->id != scene_id) {
    throw Error(Errc::invalid_argument, "no scene " + std::to_string(scene_id));
  }
  return *it;
}

const std::vector<LabeledSample>& DatasetSplit::split(SplitName s) const {
  switch (s) {
    case SplitName::train: return train;
    case SplitName::test_seen: return test_seen;
    case SplitName::test_unseen: return test_unseen;
  }
  return train;
}

std::string DatasetSplit::content_hash() const {
  Sha256 h;
  h.update(config.to_json().dump());
  for (const auto& c : catalog.categories()) {
    h.update(c.name + ":" + std::to_string(c.glyph) + (c.seen ? "s" : "u") + ";");
  }
  for (const auto& w : vocabulary) h.update(w + " ");
  for (const auto& s : scenes) h.update(serialize_scene(s));
  for (auto name : {SplitName::train, SplitName::test_seen, SplitName::test_unseen}) {
    for (const auto& s : split(name)) {
      h.update(std::to_string(s.sample_id) + "|" + std::string(to_string(s.split)) + "|" +
               std::to_string(s.scene_id) + "|" + s.query.text + "|" + to_json(s.query.attributes).dump() +
               "|" + std::to_string(s.query.target_id) + "|" + std::to_string(s.query.template_id));
      h.update(std::span<const std::uint8_t>(s.image.rgb));
      h.update(std::span<const std::uint8_t>(s.gt_mask.bits));
    }
  }
  return h.hex_digest();
}

std::vector<int> assign_buckets(int n, const std::vector<double>& mix) {
  double total = 0.0;
  for (double m : mix) total += m;
  if (mix.size() != 4 || total <= 0.0) throw Error(Errc::invalid_argument, "attribute_mix needs 4 weights");
  std::vector<int> out;
  std::vector<int> assigned(4, 0);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_deficit = -1e300;
    for (int a = 0; a < 4; ++a) {
      if (mix[a] <= 0.0) continue;
      const double deficit = (mix[a] / total) * (i + 1) - assigned[a];
      if (deficit > best_deficit + 1e-12) {
        best_deficit = deficit;
        best = a;
      }
    }
    ++assigned[best];
    out.push_back(best + 1);
  }
  return out;
}

namespace {

constexpr int kSceneIdStride = 1'000'000;

struct SlotResult {
  std::optional<LabeledSample> sample;
  std::optional<Scene> scene;
  std::string error;
};

SlotResult fill_slot(const DatasetConfig& config, const Catalog& catalog, SplitName split,
                     const std::vector<std::string>& pool, int slot, int bucket) {
  SlotResult result;
  const int split_index = static_cast<int>(split);
  const int scene_id = split_index * kSceneIdStride + slot;
  for (int attempt = 0; attempt < config.max_scene_attempts; ++attempt) {
    // Exact minimal queries first; later attempts accept over-specified ones.
    const bool exact = attempt < config.max_scene_attempts / 2;
    const std::uint64_t seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(split_index) * kSceneIdStride + slot,
                    static_cast<std::uint64_t>(attempt));
    Rng rng(derive_seed(seed, 1));

    SceneConfig sc;
    sc.height = sc.width = config.image_size;
    std::vector<std::string> cats = pool;
    rng.shuffle(std::span<std::string>(cats));
    const int max_cats = std::min<int>(config.max_categories, static_cast<int>(cats.size()));
    const int n_cats = rng.uniform_int(std::min(config.min_categories, max_cats), max_cats);
    cats.resize(n_cats);
    sc.categories = cats;
    sc.clutter_level = bucket == 1 ? 1 : (bucket == 4 ? 3 : rng.uniform_int(2, 3));
    sc.attribute_share = config.attribute_share.at(bucket - 1);

    Scene scene;
    try {
      scene = generate_scene(sc, seed, catalog, scene_id);
    } catch (const Error& e) {
      if (e.code() == Errc::placement_failed) continue;
      throw;
    }
    std::vector<int> candidates;
    for (const auto& o : scene.objects) {
      int mrq_count;
      try {
        mrq_count = compute_mrq(scene, o.id, catalog).count();
      } catch (const Error& e) {
        if (e.code() == Errc::indistinguishable) continue;
        throw;
      }
      const bool fits = exact ? mrq_count == bucket
                              : (mrq_count <= bucket && (bucket == 1 || mrq_count >= 2));
      if (fits) candidates.push_back(o.id);
    }
    if (candidates.empty()) continue;
    const int target = candidates[rng.below(candidates.size())];
    LabeledSample s;
    s.sample_id = scene_id;
    s.split = split;
    s.scene_id = scene_id;
    s.query = generate_query(scene, target, bucket, rng, catalog);
    s.image = render(scene).image;
    s.gt_mask = scene.object(target)->gt_mask;
    result.sample = std::move(s);
    result.scene = std::move(scene);
    return result;
  }
  result.error = "split " + std::string(to_string(split)) + " bucket A=" + std::to_string(bucket) +
                 " (slot " + std::to_string(slot) + ")";
  return result;
}

}  // namespace

DatasetSplit build_dataset(const DatasetConfig& config, const Catalog& catalog) {
  if (config.attribute_share.size() != 4) {
    throw Error(Errc::invalid_argument, "attribute_share needs 4 entries");
  }
  std::vector<std::string> unseen, seen;
  for (const auto& name : config.unseen_categories) {
    if (!catalog.contains(name)) throw Error(Errc::unknown_attribute, "unknown category " + name);
    unseen.push_back(name);
  }
  for (const auto& c : catalog.categories()) {
    if (std::find(unseen.begin(), unseen.end(), c.name) == unseen.end()) seen.push_back(c.name);
  }
  if (seen.empty() || unseen.empty()) throw Error(Errc::invalid_argument, "empty category partition");

  DatasetSplit out;
  out.catalog = catalog;
  out.vocabulary = grammar_vocabulary(catalog);
  out.config = config;

  const std::pair<SplitName, int> plan[] = {{SplitName::train, config.n_train},
                                           {SplitName::test_seen, config.n_test_seen},
                                           {SplitName::test_unseen, config.n_test_unseen}};
  for (const auto& [name, count] : plan) {
    if (count <= 0) throw Error(Errc::invalid_argument, std::string(to_string(name)) + " must be nonempty");
    const auto buckets = assign_buckets(count, config.attribute_mix);
    const auto& pool = name == SplitName::test_unseen ? unseen : seen;
    std::vector<SlotResult> slots(count);
    std::vector<std::string> failures(count);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        slots[i] = fill_slot(config, catalog, name, pool, i, buckets[i]);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
    std::string infeasible;
    for (int i = 0; i < count; ++i) {
      if (!failures[i].empty()) throw Error(Errc::invalid_argument, failures[i]);
      if (!slots[i].error.empty()) infeasible += (infeasible.empty() ? "" : "; ") + slots[i].error;
    }
    if (!infeasible.empty()) throw Error(Errc::infeasible_mixture, infeasible);
    auto& dst = name == SplitName::train ? out.train
                : name == SplitName::test_seen ? out.test_seen : out.test_unseen;
    for (auto& slot : slots) {
      dst.push_back(std::move(*slot.sample));
      out.scenes.push_back(std::move(*slot.scene));
    }
  }
  std::sort(out.scenes.begin(), out.scenes.end(), [](const Scene& a, const Scene& b) { return a.id < b.id; });
  return out;
}

}  // namespace groundlab::scenegen
