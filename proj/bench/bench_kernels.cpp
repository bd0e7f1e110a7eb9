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

// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// thread counts; results are identical by construction, only timing differs.
#include <benchmark/benchmark.h>

#include <vector>

#include "groundlab/core/random.hpp"
#include "groundlab/kernels/kernels.hpp"

namespace {

using namespace groundlab;

Image random_image(int side, std::uint64_t seed) {
  Rng rng(seed);
  Image im(side, side);
  for (auto& v : im.rgb) v = static_cast<std::uint8_t>(rng.below(256));
  return im;
}

Mask random_blob(int side, std::uint64_t seed) {
  Rng rng(seed);
  Mask m(side, side);
  const double cx = rng.uniform(0.3, 0.7) * side, cy = rng.uniform(0.3, 0.7) * side;
  const double r = rng.uniform(0.1, 0.3) * side;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) m.at(y, x) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
  }
  return m;
}

template <bool Omp>
void BM_patchify(benchmark::State& st) {
  const auto im = random_image(static_cast<int>(st.range(0)), 1);
  Mat out;
  for (auto _ : st) {
    if constexpr (Omp) kernels::omp::patchify(im, 16, out);
    else kernels::serial::patchify(im, 16, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_scatter(benchmark::State& st) {
  const int side = 8, k = 4, c = static_cast<int>(st.range(0));
  Rng rng(2);
  Mat cols(side * side, k * k * c);
  for (Eigen::Index i = 0; i < cols.size(); ++i) cols.data()[i] = rng.normal();
  Mat out;
  for (auto _ : st) {
    if constexpr (Omp) kernels::omp::blocks_scatter(cols, side, k, c, out);
    else kernels::serial::blocks_scatter(cols, side, k, c, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_softmax_bce(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  Rng rng(3);
  Mat logits(side * side, 2);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = rng.normal();
  const auto gt = random_blob(side, 4);
  std::vector<double> prob;
  Mat grad;
  for (auto _ : st) {
    double loss = Omp ? kernels::omp::softmax_bce(logits, gt.bits, 1e-7, prob, grad)
                      : kernels::serial::softmax_bce(logits, gt.bits, 1e-7, prob, grad);
    benchmark::DoNotOptimize(loss);
  }
}

template <bool Omp>
void BM_batch_overlap(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  std::vector<Mask> a, b;
  for (int i = 0; i < n; ++i) {
    a.push_back(random_blob(128, 10 + i));
    b.push_back(random_blob(128, 1000 + i));
  }
  std::vector<kernels::MaskPair> pairs;
  for (int i = 0; i < n; ++i) pairs.push_back({&a[i], &b[i]});
  for (auto _ : st) {
    auto r = Omp ? kernels::omp::batch_overlap(pairs) : kernels::serial::batch_overlap(pairs);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Omp>
void BM_dilate(benchmark::State& st) {
  const auto m = random_blob(128, 5);
  const int r = static_cast<int>(st.range(0));
  for (auto _ : st) {
    auto d = Omp ? kernels::omp::dilate(m, r) : kernels::serial::dilate(m, r);
    benchmark::DoNotOptimize(d.bits.data());
  }
}

}  // namespace

BENCHMARK(BM_patchify<false>)->Name("patchify/serial")->Arg(128)->Arg(256);
BENCHMARK(BM_patchify<true>)->Name("patchify/omp")->Arg(128)->Arg(256);
BENCHMARK(BM_scatter<false>)->Name("blocks_scatter/serial")->Arg(8)->Arg(64);
BENCHMARK(BM_scatter<true>)->Name("blocks_scatter/omp")->Arg(8)->Arg(64);
BENCHMARK(BM_softmax_bce<false>)->Name("softmax_bce/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_softmax_bce<true>)->Name("softmax_bce/omp")->Arg(128)->Arg(512);
BENCHMARK(BM_batch_overlap<false>)->Name("batch_overlap/serial")->Arg(200);
BENCHMARK(BM_batch_overlap<true>)->Name("batch_overlap/omp")->Arg(200);
BENCHMARK(BM_dilate<false>)->Name("dilate/serial")->Arg(1)->Arg(2);
BENCHMARK(BM_dilate<true>)->Name("dilate/omp")->Arg(1)->Arg(2);

BENCHMARK_MAIN();
