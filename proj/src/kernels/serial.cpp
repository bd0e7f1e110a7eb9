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

#include "detail.hpp"
#include "groundlab/kernels/kernels.hpp"

namespace groundlab::kernels::serial {

void patchify(const Image& image, int patch, Mat& out) {
  if (patch <= 0 || image.height % patch != 0 || image.width % patch != 0) {
    throw Error(Errc::shape_mismatch, "image side not divisible by patch size");
  }
  const int gh = image.height / patch, gw = image.width / patch;
  out.resize(gh * gw, 3 * patch * patch);
  for (int py = 0; py < gh; ++py) {
    for (int px = 0; px < gw; ++px) {
      const int row = py * gw + px;
      for (int dy = 0; dy < patch; ++dy) {
        for (int dx = 0; dx < patch; ++dx) {
          const std::uint8_t* p = image.pixel(py * patch + dy, px * patch + dx);
          for (int c = 0; c < 3; ++c) {
            out(row, (dy * patch + dx) * 3 + c) = detail::pixel_value(p[c]);
          }
        }
      }
    }
  }
}

void blocks_scatter(const Mat& cols, int side, int k, int channels, Mat& out) {
  const int out_side = side * k;
  out.resize(out_side * out_side, channels);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          for (int c = 0; c < channels; ++c) {
            out((y * k + dy) * out_side + x * k + dx, c) =
                cols(y * side + x, (dy * k + dx) * channels + c);
          }
        }
      }
    }
  }
}

void blocks_gather(const Mat& grid, int side, int k, int channels, Mat& cols) {
  const int out_side = side * k;
  cols.resize(side * side, k * k * channels);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          for (int c = 0; c < channels; ++c) {
            cols(y * side + x, (dy * k + dx) * channels + c) =
                grid((y * k + dy) * out_side + x * k + dx, c);
          }
        }
      }
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
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p;
    total += detail::bce_pixel(logits(i, 0), logits(i, 1), target[i], eps, p);
    prob_fg[i] = p;
    const double d = (p - static_cast<double>(target[i])) * inv_n;
    grad(i, 0) = -d;
    grad(i, 1) = d;
  }
  return total * inv_n;
}

Overlap overlap(const Mask& a, const Mask& b) {
  detail::check_same_shape(a, b);
  Overlap o;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    o.intersection += (a.bits[i] & b.bits[i]);
    o.uni += (a.bits[i] | b.bits[i]);
  }
  return o;
}

std::vector<Overlap> batch_overlap(std::span<const MaskPair> pairs) {
  std::vector<Overlap> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(overlap(*p.a, *p.b));
  return out;
}

namespace {

Mask morph(const Mask& m, int radius, bool dilation) {
  Mask out(m.height, m.width);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      bool hit = !dilation;
      for (int dy = -radius; dy <= radius && hit != dilation; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (!detail::in_disk(dy, dx, radius)) continue;
          const int yy = y + dy, xx = x + dx;
          // Outside the raster counts as background.
          const bool v = yy >= 0 && yy < m.height && xx >= 0 && xx < m.width && m.at(yy, xx);
          if (dilation && v) { hit = true; break; }
          if (!dilation && !v) { hit = false; break; }
        }
      }
      out.at(y, x) = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

Mask dilate(const Mask& m, int radius) { return radius <= 0 ? m : morph(m, radius, true); }
Mask erode(const Mask& m, int radius) { return radius <= 0 ? m : morph(m, radius, false); }

}  // namespace groundlab::kernels::serial
