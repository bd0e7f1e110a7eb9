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

#include <set>
#include <vector>

#include "groundlab/core/error.hpp"
#include "groundlab/core/fileio.hpp"
#include "groundlab/core/hash.hpp"
#include "groundlab/core/random.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  CHECK(Rng(42).next_u64() != c.next_u64());
}

TEST_CASE("rng variates stay in range") {
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    CHECK(r.below(7) < 7u);
    const int k = r.uniform_int(-3, 3);
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal variates have unit moments") {
  Rng r(5);
  double s = 0, s2 = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shuffle is a permutation") {
  Rng r(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(std::span<int>(v));
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
}

TEST_CASE("derived seeds are distinct and order independent") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a) {
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(13, a, b));
  }
  CHECK(seen.size() == 400);
  CHECK(derive_seed(13, 1, 2) == derive_seed(13, 1, 2));
  CHECK(derive_seed(13, 1, 2) != derive_seed(14, 1, 2));
}

TEST_CASE("sha256 matches the published test vectors") {
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string_view("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  Sha256 h;
  h.update(std::string_view("a"));
  h.update(std::string_view("bc"));
  CHECK(h.hex_digest() == sha256_hex(std::string_view("abc")));
}

TEST_CASE("file round trip and missing files") {
  const auto dir = test::scratch_dir("core_io");
  write_text(dir / "a.txt", "hello\n");
  CHECK(read_text(dir / "a.txt") == "hello\n");
  std::vector<std::uint8_t> bytes{0, 1, 255};
  write_bytes(dir / "b.bin", bytes);
  CHECK(read_bytes(dir / "b.bin") == bytes);
  CHECK_THROWS_AS(read_text(dir / "missing"), Error);
}

TEST_CASE("error names are kebab case") {
  CHECK(errc_name(Errc::unknown_key) == "unknown-key");
  CHECK(errc_name(Errc::fingerprint_mismatch) == "fingerprint-mismatch");
  Error e(Errc::no_head_noun, "x");
  CHECK(e.code() == Errc::no_head_noun);
  CHECK(std::string(e.what()) == "no-head-noun: x");
}
