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

#include "groundlab/nn/layers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "groundlab/core/error.hpp"

namespace groundlab::nn {

// ---- Linear ---------------------------------------------------------------

void Linear::init(Rng& rng, Real std) {
  for (Eigen::Index i = 0; i < weight.size(); ++i) weight.data()[i] = std * rng.normal();
  bias.setZero();
}

void Linear::forward(const Mat& x, Mat& y) const {
  if (x.cols() != weight.rows()) throw Error(Errc::shape_mismatch, "linear: input width");
  y.noalias() = x * weight;
  y.rowwise() += bias.row(0);
}

void Linear::backward(const Mat& x, const Mat& dy, Linear& grad, Mat* dx) const {
  grad.weight.noalias() += x.transpose() * dy;
  grad.bias.row(0) += dy.colwise().sum();
  if (dx != nullptr) dx->noalias() = dy * weight.transpose();
}

void Linear::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "weight", &weight});
  out.push_back({prefix + "bias", &bias});
}

// ---- LayerNorm ------------------------------------------------------------

void LayerNorm::forward(const Mat& x, Mat& y, Cache& cache) const {
  const Eigen::Index n = x.rows(), d = x.cols();
  cache.xhat.resize(n, d);
  cache.rstd.resize(n);
  y.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Real mean = x.row(i).mean();
    const Real var = (x.row(i).array() - mean).square().mean();
    const Real rstd = 1.0 / std::sqrt(var + eps);
    cache.rstd(i) = rstd;
    cache.xhat.row(i) = (x.row(i).array() - mean) * rstd;
  }
  y = (cache.xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
}

void LayerNorm::backward(const Mat& dy, const Cache& cache, LayerNorm& grad, Mat& dx) const {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  grad.gamma.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  grad.beta.row(0) += dy.colwise().sum();
  dx.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = (dy.row(i).array() * gamma.row(0).array()).eval();
    const Real mean_g = g.mean();
    const Real mean_gx = (g * cache.xhat.row(i).array()).mean();
    dx.row(i) = cache.rstd(i) * (g - mean_g - cache.xhat.row(i).array() * mean_gx);
  }
}

void LayerNorm::collect(ParamList& out, const std::string& prefix) {
  out.push_back({prefix + "gamma", &gamma});
  out.push_back({prefix + "beta", &beta});
}

// ---- GELU (tanh approximation) --------------------------------------------

namespace {
constexpr Real kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr Real kGeluA = 0.044715;
}  // namespace

void gelu_forward(const Mat& x, Mat& y) {
  y = x.unaryExpr([](Real v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
}

void gelu_backward(const Mat& x, const Mat& dy, Mat& dx) {
  dx = x.binaryExpr(dy, [](Real v, Real g) {
    const Real t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const Real dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    return g * (0.5 * (1.0 + t) + 0.5 * v * dt);
  });
}

// ---- Attention ------------------------------------------------------------

Attention::Attention(int query_dim, int context_dim, int inner_dim, int heads_, bool causal_)
    : q(query_dim, inner_dim),
      k(context_dim, inner_dim),
      v(context_dim, inner_dim),
      out(inner_dim, query_dim),
      heads(heads_),
      causal(causal_) {
  if (heads_ <= 0 || inner_dim % heads_ != 0) {
    throw Error(Errc::invalid_argument, "attention: inner dim not divisible by heads");
  }
}

void Attention::init(Rng& rng, Real std) {
  q.init(rng, std);
  k.init(rng, std);
  v.init(rng, std);
  out.init(rng, std);
}

void Attention::forward(const Mat& query_in, const Mat& context_in, Mat& y, Cache& c) const {
  c.query_in = query_in;
  c.context_in = context_in;
  q.forward(query_in, c.q);
  k.forward(context_in, c.k);
  v.forward(context_in, c.v);
  const Eigen::Index nq = query_in.rows(), nk = context_in.rows();
  const int dh = inner_dim() / heads;
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(dh));
  c.probs.resize(heads);
  c.ctx.resize(nq, inner_dim());
  for (int h = 0; h < heads; ++h) {
    Mat& a = c.probs[h];
    a.noalias() = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose();
    a *= scale;
    for (Eigen::Index i = 0; i < nq; ++i) {
      if (causal) {
        for (Eigen::Index j = i + 1; j < nk; ++j) a(i, j) = -std::numeric_limits<Real>::infinity();
      }
      const Real mx = a.row(i).maxCoeff();
      a.row(i) = (a.row(i).array() - mx).exp();
      a.row(i) /= a.row(i).sum();
    }
    c.ctx.middleCols(h * dh, dh).noalias() = a * c.v.middleCols(h * dh, dh);
  }
  out.forward(c.ctx, y);
}

void Attention::backward(const Mat& dy, const Cache& c, Attention& grad, Mat& d_query,
                         Mat& d_context) const {
  Mat dctx;
  out.backward(c.ctx, dy, grad.out, &dctx);
  const Eigen::Index nq = c.q.rows(), nk = c.k.rows();
  const int dh = inner_dim() / heads;
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(dh));
  Mat dq(nq, inner_dim()), dk(nk, inner_dim()), dv(nk, inner_dim());
  Mat da, ds;
  for (int h = 0; h < heads; ++h) {
    const Mat& a = c.probs[h];
    da.noalias() = dctx.middleCols(h * dh, dh) * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() = a.transpose() * dctx.middleCols(h * dh, dh);
    const Eigen::VectorXd dot = (da.array() * a.array()).rowwise().sum();
    ds = (a.array() * (da.array().colwise() - dot.array())).matrix() * scale;
    dq.middleCols(h * dh, dh).noalias() = ds * c.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() = ds.transpose() * c.q.middleCols(h * dh, dh);
  }
  Mat tmp;
  q.backward(c.query_in, dq, grad.q, &d_query);
  k.backward(c.context_in, dk, grad.k, &d_context);
  v.backward(c.context_in, dv, grad.v, &tmp);
  d_context += tmp;
}

void Attention::collect(ParamList& out_list, const std::string& prefix) {
  q.collect(out_list, prefix + "q.");
  k.collect(out_list, prefix + "k.");
  v.collect(out_list, prefix + "v.");
  out.collect(out_list, prefix + "out.");
}

// ---- TransformerBlock -----------------------------------------------------

TransformerBlock::TransformerBlock(int dim, int attn_dim, int heads, int mlp_dim, bool causal)
    : ln1(dim), attn(dim, dim, attn_dim, heads, causal), ln2(dim), fc1(dim, mlp_dim), fc2(mlp_dim, dim) {}

void TransformerBlock::init(Rng& rng, Real std) {
  attn.init(rng, std);
  fc1.init(rng, std);
  fc2.init(rng, std);
}

void TransformerBlock::forward(const Mat& x, Mat& y, Cache& c) const {
  Mat a;
  ln1.forward(x, c.ln1_out, c.ln1);
  attn.forward(c.ln1_out, c.ln1_out, a, c.attn);
  c.h = x + a;
  ln2.forward(c.h, c.ln2_out, c.ln2);
  fc1.forward(c.ln2_out, c.fc1_out);
  gelu_forward(c.fc1_out, c.act);
  fc2.forward(c.act, y);
  y += c.h;
}

void TransformerBlock::backward(const Mat& dy, const Cache& c, TransformerBlock& grad,
                                Mat& dx) const {
  Mat dact, dfc1, dln2, dh;
  fc2.backward(c.act, dy, grad.fc2, &dact);
  gelu_backward(c.fc1_out, dact, dfc1);
  fc1.backward(c.ln2_out, dfc1, grad.fc1, &dln2);
  ln2.backward(dln2, c.ln2, grad.ln2, dh);
  dh += dy;
  Mat dq, dctx, dln1;
  attn.backward(dh, c.attn, grad.attn, dq, dctx);
  dq += dctx;
  ln1.backward(dq, c.ln1, grad.ln1, dln1);
  dx = dh + dln1;
}

void TransformerBlock::collect(ParamList& out, const std::string& prefix) {
  ln1.collect(out, prefix + "ln1.");
  attn.collect(out, prefix + "attn.");
  ln2.collect(out, prefix + "ln2.");
  fc1.collect(out, prefix + "fc1.");
  fc2.collect(out, prefix + "fc2.");
}

// ---- L2 normalisation -----------------------------------------------------

RowVec l2_normalize(const RowVec& x, Real& norm) {
  norm = std::max(x.norm(), Real{1e-12});
  return x / norm;
}

RowVec l2_normalize_backward(const RowVec& y, Real norm, const RowVec& dy) {
  return (dy - y * y.dot(dy)) / norm;
}

}  // namespace groundlab::nn
