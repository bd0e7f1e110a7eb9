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

#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference in
// `serial::` and an OpenMP version in `omp::` with the same signature. The
// OpenMP versions partition work statically and reduce partial sums in a
// fixed chunk order, so their results do not depend on the thread count.
// Library code calls `omp::`; tests check the two agree and bench_kernels
// times them against each other.

#include <cstdint>
#include <span>
#include <vector>

#include "groundlab/core/tensor.hpp"

namespace groundlab::kernels {

struct Overlap {
  std::uint64_t intersection = 0;
  std::uint64_t uni = 0;
  friend bool operator==(const Overlap&, const Overlap&) = default;
};

struct MaskPair {
  const Mask* a;
  const Mask* b;
};

// Pixel count per reduction chunk; fixed so chunk boundaries never depend on threads.
inline constexpr std::size_t kReduceChunk = 1024;

namespace serial {

/// image (H×W×3) -> (H/p·W/p) × (3·p·p), pixels centred and scaled to roughly unit range.
void patchify(const Image& image, int patch, Mat& out);
/// Non-overlapping transposed-convolution scatter: cols is (side² × k²·c), out is ((side·k)² × c).
void blocks_scatter(const Mat& cols, int side, int k, int channels, Mat& out);
/// Adjoint of blocks_scatter.
void blocks_gather(const Mat& grid, int side, int k, int channels, Mat& cols);
/// Two-class softmax followed by binary cross-entropy on the foreground channel,
/// probabilities clamped to [eps, 1-eps]. logits is N×2. Writes foreground
/// probabilities and dLoss/dlogits ((p - g) / N, the interior gradient).
double softmax_bce(const Mat& logits, std::span<const std::uint8_t> target, double eps,
                   std::vector<double>& prob_fg, Mat& grad);
Overlap overlap(const Mask& a, const Mask& b);
std::vector<Overlap> batch_overlap(std::span<const MaskPair> pairs);
/// Morphology with a disk structuring element.
Mask dilate(const Mask& m, int radius);
Mask erode(const Mask& m, int radius);

}  // namespace serial

namespace omp {

/// image (H×W×3) -> (H/p·W/p) × (3·p·p), pixels centred and scaled to roughly unit range.
void patchify(const Image& image, int patch, Mat& out);
/// Non-overlapping transposed-convolution scatter: cols is (side² × k²·c), out is ((side·k)² × c).
void blocks_scatter(const Mat& cols, int side, int k, int channels, Mat& out);
/// Adjoint of blocks_scatter.
void blocks_gather(const Mat& grid, int side, int k, int channels, Mat& cols);
/// Two-class softmax followed by binary cross-entropy on the foreground channel,
/// probabilities clamped to [eps, 1-eps]. logits is N×2. Writes foreground
/// probabilities and dLoss/dlogits ((p - g) / N, the interior gradient).
double softmax_bce(const Mat& logits, std::span<const std::uint8_t> target, double eps,
                   std::vector<double>& prob_fg, Mat& grad);
Overlap overlap(const Mask& a, const Mask& b);
std::vector<Overlap> batch_overlap(std::span<const MaskPair> pairs);
/// Morphology with a disk structuring element.
Mask dilate(const Mask& m, int radius);
Mask erode(const Mask& m, int radius);

}  // namespace omp

}  // namespace groundlab::kernels
