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

#include <omp.h>

#include "detail.hpp"
#include "groundlab/kernels/kernels.hpp"

namespace groundlab::kernels::omp {

void patchify(const Image& image, int patch, Mat& out) {
  if (patch <= 0 || image.height % patch != 0 || image.width % patch != 0) {
    throw Error(Errc::shape_mismatch, "image side not divisible by patch size");
  }
  const int gh = image.height / patch, gw = image.width / patch;
  out.resize(gh * gw, 3 * patch * patch);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < gh * gw; ++row) {
    const int py = row / gw, px = row % gw;
    Real* dst = out.row(row).data();
    for (int dy = 0; dy < patch; ++dy) {
      const std::uint8_t* src = image.pixel(py * patch + dy, px * patch);
      for (int j = 0; j < patch * 3; ++j) dst[dy * patch * 3 + j] = detail::pixel_value(src[j]);
    }
  }
}

void blocks_scatter(const Mat& cols, int side, int k, int channels, Mat& out) {
  const int out_side = side * k;
  out.resize(out_side * out_side, channels);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < side * side; ++r) {
    const int y = r / side, x = r % side;
    const Real* src = cols.row(r).data();
    for (int dy = 0; dy < k; ++dy) {
      Real* dst = out.row((y * k + dy) * out_side + x * k).data();
      std::copy(src + dy * k * channels, src + (dy + 1) * k * channels, dst);
    }
  }
}

void blocks_gather(const Mat& grid, int side, int k, int channels, Mat& cols) {
  const int out_side = side * k;
  cols.resize(side * side, k * k * channels);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < side * side; ++r) {
    const int y = r / side, x = r % side;
    Real* dst = cols.row(r).data();
    for (int dy = 0; dy < k; ++dy) {
      const Real* src = grid.row((y * k + dy) * out_side + x * k).data();
      std::copy(src, src + k * channels, dst + dy * k * channels);
    }
  }
}

double softmax_bce(const Mat& logits, std::span<const std::uint8_t> target, double eps,
                   std::vector<double>& prob_fg, Mat& grad) {
  const auto n = static_cast<std::size_t>(logits.rows());
  if (logits.cols() != 2 || target.size() != n) {
    throw Error(Errc::shape_mismatch, "softmax_bce: logits/target shape");
  }
  prob_fg.resize(n);
  grad.resize(logits.rows(), 2);
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < n_chunks; ++ch) {
    const std::size_t end = std::min(n, (ch + 1) * kReduceChunk);
    double acc = 0.0;
    for (std::size_t i = ch * kReduceChunk; i < end; ++i) {
      double p;
      acc += detail::bce_pixel(logits(i, 0), logits(i, 1), target[i], eps, p);
      prob_fg[i] = p;
      const double d = (p - static_cast<double>(target[i])) * inv_n;
      grad(i, 0) = -d;
      grad(i, 1) = d;
    }
    partial[ch] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total * inv_n;
}

Overlap overlap(const Mask& a, const Mask& b) {
  detail::check_same_shape(a, b);
  const std::size_t n = a.bits.size();
  const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<Overlap> partial(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < n_chunks; ++ch) {
    const std::size_t end = std::min(n, (ch + 1) * kReduceChunk);
    std::uint64_t inter = 0, uni = 0;
    for (std::size_t i = ch * kReduceChunk; i < end; ++i) {
      inter += (a.bits[i] & b.bits[i]);
      uni += (a.bits[i] | b.bits[i]);
    }
    partial[ch] = {inter, uni};
  }
  Overlap o;
  for (const auto& p : partial) {
    o.intersection += p.intersection;
    o.uni += p.uni;
  }
  return o;
}

std::vector<Overlap> batch_overlap(std::span<const MaskPair> pairs) {
  std::vector<Overlap> out(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i] = serial::overlap(*pairs[i].a, *pairs[i].b);
  }
  return out;
}

namespace {

// Separable row spans of the disk: for offset dy, columns [-span, span] lie inside.
std::vector<int> disk_spans(int radius) {
  std::vector<int> spans(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    int s = 0;
    while (detail::in_disk(dy, s + 1, radius)) ++s;
    spans[dy + radius] = s;
  }
  return spans;
}

Mask morph(const Mask& m, int radius, bool dilation) {
  Mask out(m.height, m.width);
  const auto spans = disk_spans(radius);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      bool hit = !dilation;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        const int s = spans[dy + radius];
        for (int dx = -s; dx <= s; ++dx) {
          const int xx = x + dx;
          const bool v = yy >= 0 && yy < m.height && xx >= 0 && xx < m.width && m.at(yy, xx);
          if (dilation && v) { hit = true; goto done; }
          if (!dilation && !v) { hit = false; goto done; }
        }
      }
    done:
      out.at(y, x) = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

Mask dilate(const Mask& m, int radius) { return radius <= 0 ? m : morph(m, radius, true); }
Mask erode(const Mask& m, int radius) { return radius <= 0 ? m : morph(m, radius, false); }

}  // namespace groundlab::kernels::omp
