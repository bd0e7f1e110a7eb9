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

#include <string>
#include <vector>

#include "groundlab/core/random.hpp"
#include "groundlab/core/tensor.hpp"
#include "groundlab/nn/params.hpp"

namespace groundlab::nn {

/// y = x·W + b, with W stored in × out.
struct Linear {
  Mat weight;
  Mat bias;

  Linear() = default;
  Linear(int in, int out) : weight(Mat::Zero(in, out)), bias(Mat::Zero(1, out)) {}

  int in_dim() const { return static_cast<int>(weight.rows()); }
  int out_dim() const { return static_cast<int>(weight.cols()); }

  /// Normal(0, std) weights, zero bias.
  void init(Rng& rng, Real std);
  void forward(const Mat& x, Mat& y) const;
  /// Accumulates into grad; writes dx when non-null.
  void backward(const Mat& x, const Mat& dy, Linear& grad, Mat* dx) const;
  void collect(ParamList& out, const std::string& prefix);
};

struct LayerNorm {
  Mat gamma;
  Mat beta;
  Real eps = 1e-5;

  struct Cache {
    Mat xhat;
    Eigen::VectorXd rstd;
  };

  LayerNorm() = default;
  explicit LayerNorm(int dim) : gamma(Mat::Ones(1, dim)), beta(Mat::Zero(1, dim)) {}

  void forward(const Mat& x, Mat& y, Cache& cache) const;
  void backward(const Mat& dy, const Cache& cache, LayerNorm& grad, Mat& dx) const;
  void collect(ParamList& out, const std::string& prefix);
};

void gelu_forward(const Mat& x, Mat& y);
/// dx = dy ⊙ gelu'(x).
void gelu_backward(const Mat& x, const Mat& dy, Mat& dx);

/// Multi-head attention with a separate key/value source. Self-attention passes
/// the same matrix as query and context.
struct Attention {
  Linear q;
  Linear k;
  Linear v;
  Linear out;
  int heads = 1;
  bool causal = false;

  struct Cache {
    Mat query_in;
    Mat context_in;
    Mat q, k, v;
    std::vector<Mat> probs;  // one n_q × n_kv matrix per head
    Mat ctx;
  };

  Attention() = default;
  Attention(int query_dim, int context_dim, int inner_dim, int heads, bool causal);

  int inner_dim() const { return q.out_dim(); }
  void init(Rng& rng, Real std);
  void forward(const Mat& query_in, const Mat& context_in, Mat& y, Cache& cache) const;
  void backward(const Mat& dy, const Cache& cache, Attention& grad, Mat& d_query,
                Mat& d_context) const;
  void collect(ParamList& out, const std::string& prefix);
};

/// Pre-norm transformer block: h = x + Attn(LN(x)); y = h + MLP(LN(h)).
struct TransformerBlock {
  LayerNorm ln1;
  Attention attn;
  LayerNorm ln2;
  Linear fc1;
  Linear fc2;

  struct Cache {
    LayerNorm::Cache ln1;
    Mat ln1_out;
    Attention::Cache attn;
    Mat h;
    LayerNorm::Cache ln2;
    Mat ln2_out;
    Mat fc1_out;
    Mat act;
  };

  TransformerBlock() = default;
  TransformerBlock(int dim, int attn_dim, int heads, int mlp_dim, bool causal);

  void init(Rng& rng, Real std);
  void forward(const Mat& x, Mat& y, Cache& cache) const;
  void backward(const Mat& dy, const Cache& cache, TransformerBlock& grad, Mat& dx) const;
  void collect(ParamList& out, const std::string& prefix);
};

/// Row-wise L2 normalisation of a single row vector, with its backward.
RowVec l2_normalize(const RowVec& x, Real& norm);
RowVec l2_normalize_backward(const RowVec& y, Real norm, const RowVec& dy);

}  // namespace groundlab::nn
