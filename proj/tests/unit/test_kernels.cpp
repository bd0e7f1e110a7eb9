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

#include <cmath>

#include "groundlab/kernels/kernels.hpp"
#include "unit/helpers.hpp"

using namespace groundlab;
namespace ks = groundlab::kernels::serial;
namespace ko = groundlab::kernels::omp;

TEST_CASE("patchify agrees and has the expected shape") {
  Rng rng(1);
  Image im(64, 48);
  for (auto& v : im.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  Mat a, b;
  ks::patchify(im, 16, a);
  ko::patchify(im, 16, b);
  CHECK(a.rows() == 12);
  CHECK(a.cols() == 3 * 16 * 16);
  CHECK(a == b);
}

TEST_CASE("blocks_scatter and blocks_gather agree and are adjoint") {
  Rng rng(2);
  const int side = 4, k = 3, c = 2;
  const Mat cols = test::random_mat(rng, side * side, k * k * c);
  const Mat grid = test::random_mat(rng, side * k * side * k, c);
  Mat s1, s2, g1, g2;
  ks::blocks_scatter(cols, side, k, c, s1);
  ko::blocks_scatter(cols, side, k, c, s2);
  ks::blocks_gather(grid, side, k, c, g1);
  ko::blocks_gather(grid, side, k, c, g2);
  CHECK(s1 == s2);
  CHECK(g1 == g2);
  // <scatter(x), y> == <x, gather(y)>
  const double lhs = (s1.array() * grid.array()).sum();
  const double rhs = (cols.array() * g1.array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("blocks_scatter places each cell block") {
  // One cell, k = 2, one channel: the four columns land on the 2x2 block in raster order.
  Mat cols(1, 4);
  cols << 1, 2, 3, 4;
  Mat out;
  ks::blocks_scatter(cols, 1, 2, 1, out);
  REQUIRE(out.rows() == 4);
  CHECK(out(0, 0) == 1);
  CHECK(out(1, 0) == 2);
  CHECK(out(2, 0) == 3);
  CHECK(out(3, 0) == 4);
}

TEST_CASE("softmax_bce matches a naive loop") {
  Rng rng(3);
  const int n = 3000;
  const Mat logits = test::random_mat(rng, n, 2, 3.0);
  const Mask gt = test::random_mask(rng, 50, 60, 0.3);
  std::vector<double> p1, p2;
  Mat d1, d2;
  const double l1 = ks::softmax_bce(logits, gt.bits, 1e-7, p1, d1);
  const double l2 = ko::softmax_bce(logits, gt.bits, 1e-7, p2, d2);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
  CHECK(p1 == p2);
  CHECK((d1 - d2).cwiseAbs().maxCoeff() < 1e-15);

  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = std::max(logits(i, 0), logits(i, 1));
    const double e0 = std::exp(logits(i, 0) - m), e1 = std::exp(logits(i, 1) - m);
    double p = e1 / (e0 + e1);
    CHECK(p1[i] == doctest::Approx(p).epsilon(1e-12));
    p = std::min(std::max(p, 1e-7), 1 - 1e-7);
    const double g = gt.bits[i];
    loss += -(g * std::log(p) + (1 - g) * std::log(1 - p));
    const double interior = (e1 / (e0 + e1) - g) / n;
    CHECK(d1(i, 1) == doctest::Approx(interior).epsilon(1e-10));
    CHECK(d1(i, 0) == doctest::Approx(-interior).epsilon(1e-10));
  }
  CHECK(l1 == doctest::Approx(loss / n).epsilon(1e-10));
}

TEST_CASE("overlap counts agree with a pixel loop") {
  Rng rng(4);
  std::vector<Mask> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(test::random_mask(rng, 37, 41, rng.uniform()));
    b.push_back(test::random_mask(rng, 37, 41, rng.uniform()));
  }
  std::vector<kernels::MaskPair> pairs;
  for (int i = 0; i < 40; ++i) pairs.push_back({&a[i], &b[i]});
  const auto s = ks::batch_overlap(pairs);
  const auto o = ko::batch_overlap(pairs);
  CHECK(s == o);
  for (int i = 0; i < 40; ++i) {
    std::uint64_t in = 0, un = 0;
    for (std::size_t j = 0; j < a[i].bits.size(); ++j) {
      in += a[i].bits[j] && b[i].bits[j];
      un += a[i].bits[j] || b[i].bits[j];
    }
    CHECK(s[i].intersection == in);
    CHECK(s[i].uni == un);
    CHECK(ks::overlap(a[i], b[i]) == s[i]);
    CHECK(ko::overlap(a[i], b[i]) == s[i]);
  }
}

TEST_CASE("morphology agrees and is ordered") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Mask m = test::random_mask(rng, 30, 30, 0.5);
    for (int r = 0; r <= 3; ++r) {
      const Mask d = ks::dilate(m, r), e = ks::erode(m, r);
      CHECK(d == ko::dilate(m, r));
      CHECK(e == ko::erode(m, r));
      for (std::size_t i = 0; i < m.bits.size(); ++i) {
        CHECK(e.bits[i] <= m.bits[i]);
        CHECK(m.bits[i] <= d.bits[i]);
      }
    }
    CHECK(ks::dilate(m, 0) == m);
    CHECK(ks::erode(m, 0) == m);
  }
}

TEST_CASE("erosion treats the border as background") {
  Mask full(10, 10);
  std::fill(full.bits.begin(), full.bits.end(), 1);
  const Mask e = ks::erode(full, 1);
  CHECK(e.at(0, 0) == 0);
  CHECK(e.at(5, 5) == 1);
  int area = 0;
  for (auto b : e.bits) area += b;
  CHECK(area == 64);
}
