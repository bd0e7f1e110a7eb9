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
#include <sstream>

#include <nlohmann/json.hpp>

#include "groundlab/cli/commands.hpp"
#include "groundlab/cli/config.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
using namespace groundlab::cli;

namespace {

std::filesystem::path write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kTiny{"--set", "repro.smoke=true", "--set", "data.n_train=24", "--set",
                                     "data.n_test_seen=6", "--set", "data.n_test_unseen=6", "--set",
                                     "eval.sa_trials=2", "-q"};

std::vector<std::string> tiny(std::vector<std::string> head) {
  head.insert(head.end(), kTiny.begin(), kTiny.end());
  return head;
}

}  // namespace

TEST_CASE("empty config file resolves to the defaults") {
  const auto dir = test::scratch_dir("cli_empty");
  const auto file = write_file(dir / "empty.cfg", "# nothing here\n\n");
  const auto c = resolve_config(file, {});
  CHECK(c.snapshot() == RunConfig().snapshot());
  CHECK(c.integer("decoder.D") == 64);
  CHECK(c.boolean("train.freeze_encoder"));
}

TEST_CASE("file values land in the snapshot") {
  const auto dir = test::scratch_dir("cli_file");
  const auto file = write_file(dir / "run.cfg", "decoder.D = 128\ntrain.epochs=3  # short\n");
  const auto c = resolve_config(file, {});
  CHECK(c.integer("decoder.D") == 128);
  CHECK(c.snapshot().find("decoder.D = 128") != std::string::npos);
  const auto snap = write_snapshot(c, dir / "snap");
  CHECK(slurp(snap) == c.snapshot());
}

TEST_CASE("unknown keys and bad values are named") {
  const auto dir = test::scratch_dir("cli_bad");
  try {
    resolve_config(write_file(dir / "a.cfg", "decoder.depthh = 3\n"), {});
    FAIL("accepted an unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_key);
    CHECK(std::string(e.what()).find("decoder.depthh") != std::string::npos);
  }
  try {
    resolve_config(std::nullopt, {{"decoder.D", "wide"}});
    FAIL("accepted a non-integer");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::type_mismatch);
    CHECK(std::string(e.what()).find("decoder.D") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("no equals sign\n"), Error);
  CHECK(std::get<bool>(parse_value("k", ValueType::boolean, "yes")));
  CHECK(std::get<std::vector<long>>(parse_value("k", ValueType::int_list, "1,2,3")) == std::vector<long>{1, 2, 3});
}

TEST_CASE("overrides beat the file, the file beats defaults") {
  const auto dir = test::scratch_dir("cli_prec");
  const auto file = write_file(dir / "p.cfg", "decoder.D = 32\ntrain.epochs = 5\n");
  const auto c = resolve_config(file, {{"decoder.D", "16"}});
  CHECK(c.integer("decoder.D") == 16);
  CHECK(c.integer("train.epochs") == 5);
  CHECK(c.integer("train.batch_size") == 16);
}

TEST_CASE("config hash ignores location keys") {
  RunConfig a, b;
  b.set("out", "/elsewhere");
  b.set("data.dir", "/data");
  CHECK(a.hash() == b.hash());
  CHECK(a.snapshot() != b.snapshot());
  b.set("seed", "99");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 64);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(Errc::unknown_key) == kConfig);
  CHECK(exit_code_for(Errc::type_mismatch) == kConfig);
  CHECK(exit_code_for(Errc::io_error) == kRuntime);
  CHECK(invoke({"frobnicate"}).code == kUsage);
  CHECK(invoke({}).code == kUsage);
  CHECK(invoke({"--help"}).code == kOk);
  const auto dir = test::scratch_dir("cli_codes");
  const auto r = invoke({"gen-data", "--out", dir.string(), "--set", "decoder.depthh=3"});
  CHECK(r.code == kConfig);
  CHECK(r.err.find("unknown-key") != std::string::npos);
  const auto rec = nlohmann::json::parse(slurp(dir / "error.json"));
  CHECK(rec.at("error") == "unknown-key");
  CHECK(rec.at("exit_code") == kConfig);
  const auto missing = invoke({"report", "--out", (dir / "nothing").string(), "-q"});
  CHECK(missing.code == kRuntime);
}

TEST_CASE("tiny full-finetune train run is flagged as such") {
  const auto dir = test::scratch_dir("cli_train");
  const auto r = invoke(tiny({"train", "--out", dir.string(), "--freeze-encoder=false"}));
  INFO(r.err);
  REQUIRE(r.code == kOk);
  CHECK(r.out.find("mode=full_finetune") != std::string::npos);
  const auto rep = nlohmann::json::parse(slurp(dir / "train_report_hierarchical_film.full_finetune.json"));
  CHECK(rep.at("report").at("mode") == "full_finetune");
  CHECK(rep.contains("config_hash"));
  CHECK(rep.contains("dataset_hash"));
  CHECK(rep.contains("seed"));
  CHECK(std::filesystem::exists(dir / "encoder_hierarchical_film.full_finetune.glck"));
}

TEST_CASE("ablation over fusion variants shares one dataset") {
  const auto dir = test::scratch_dir("cli_ablate");
  const auto r = invoke(tiny({"ablate", "--out", dir.string(), "--axis", "fusion_variant"}));
  INFO(r.err);
  REQUIRE(r.code == kOk);
  const auto rec = nlohmann::json::parse(slurp(dir / "ablate_fusion_variant" / "metrics.json"));
  const auto& reports = rec.at("reports");
  CHECK(reports.size() == 6);  // three variants, seen and unseen
  std::set<std::string> tags, hashes;
  for (const auto& rep : reports) {
    tags.insert(rep.at("identity").at("tag").get<std::string>());
    hashes.insert(rep.at("identity").at("dataset_hash").get<std::string>());
  }
  CHECK(tags.size() == 3);
  CHECK(hashes.size() == 1);
}
