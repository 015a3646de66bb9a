// Copyright 2026 The hexnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Forward and backward passes for the fixed layer set.
//
// Every backward function takes the upstream gradient of a scalar loss with
// respect to the layer output, returns the gradient with respect to the
// layer input, and ACCUMULATES parameter gradients into the `grad` buffers
// of the parameter tensors. Call zero_grad() on the parameters before a new
// accumulation round.

#ifndef HEXNAS_NUMCORE_LAYERS_HPP_
#define HEXNAS_NUMCORE_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hexnas/errors.hpp"
#include "hexnas/numcore/tensor.hpp"

namespace hexnas::numcore {

inline constexpr std::size_t kEmbeddingRows = 16;
inline constexpr std::size_t kEmbeddingDim = 8;

namespace kernels {

// sum_i a[i] * b[i] with four partial sums.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T s0{0}, s1{0}, s2{0}, s3{0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) {
    s0 += a[i] * b[i];
  }
  return (s0 + s1) + (s2 + s3);
}

// y += alpha * x
template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

// C[n x m] (+)= A[n x k] * B[m x k]^T
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
               std::size_t m, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const T v = dot(a + i * k, b + j * k, k);
      c[i * m + j] = accumulate ? c[i * m + j] + v : v;
    }
  }
}

// C[n x m] (+)= A[n x k] * B[k x m]
template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
               std::size_t m, bool accumulate) {
  if (!accumulate) {
    std::fill(c, c + n * m, T{0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      axpy(a[i * k + p], b + p * m, c + i * m, m);
    }
  }
}

// C[n x m] (+)= A[k x n]^T * B[k x m]
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
               std::size_t m, bool accumulate) {
  if (!accumulate) {
    std::fill(c, c + n * m, T{0});
  }
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      axpy(a[p * n + i], b + p * m, c + i * m, m);
    }
  }
}

// out[cols x rows] = in[rows x cols]^T
template <typename T>
std::vector<T> transpose(const T* in, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[c * rows + r] = in[r * cols + c];
    }
  }
  return out;
}

template <typename T>
inline T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

// s(x) s(-x); avoids 1 - s when s rounds near 1
template <typename T>
inline T sigmoid_slope(T x) {
  return sigmoid(x) * sigmoid(-x);
}

// 1 - tanh^2 as 1 / cosh^2
template <typename T>
inline T tanh_slope(T x) {
  const T ch = std::cosh(x);
  return T{1} / (ch * ch);
}

}  // namespace kernels

template <typename T>
void ensure_grad(BasicTensor<T>& t) {
  if (!t.has_grad()) {
    t.zero_grad();
  }
}

// ---------------------------------------------------------------- linear --

template <typename T>
struct LinearParams {
  BasicTensor<T> weight;  // [out x in]
  BasicTensor<T> bias;    // [out]

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
};

// y = x W^T + b for x [batch x in].
template <typename T>
BasicTensor<T> linear_forward(const BasicTensor<T>& x,
                              const LinearParams<T>& p) {
  require_rank(x, 2, "linear input");
  const std::size_t batch = x.dim(0);
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  if (x.dim(1) != in) {
    throw ShapeError("linear: input " + shape_string(x.shape) +
                     " incompatible with weight " +
                     shape_string(p.weight.shape));
  }
  BasicTensor<T> y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(p.bias.values.data(), out, y.values.data() + b * out);
  }
  kernels::matmul_nt(x.values.data(), p.weight.values.data(), y.values.data(),
                     batch, in, out, true);
  return y;
}

template <typename T>
BasicTensor<T> linear_backward(const BasicTensor<T>& x, LinearParams<T>& p,
                               const BasicTensor<T>& dy) {
  const std::size_t batch = x.dim(0);
  const std::size_t in = p.in_features();
  const std::size_t out = p.out_features();
  require_shape(dy, {batch, out}, "linear upstream gradient");
  ensure_grad(p.weight);
  ensure_grad(p.bias);
  // dW += dy^T x ; db += sum_b dy ; dx = dy W
  kernels::matmul_tn(dy.values.data(), x.values.data(), p.weight.grad.data(),
                     out, batch, in, true);
  for (std::size_t b = 0; b < batch; ++b) {
    kernels::axpy(T{1}, dy.values.data() + b * out, p.bias.grad.data(), out);
  }
  BasicTensor<T> dx({batch, in});
  kernels::matmul_nn(dy.values.data(), p.weight.values.data(),
                     dx.values.data(), batch, out, in, false);
  return dx;
}

// ------------------------------------------------------------------ relu --

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
  BasicTensor<T> y = x;
  y.grad.clear();
  for (T& v : y.values) {
    v = v > T{0} ? v : T{0};
  }
  return y;
}

// Subgradient at 0 is 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x,
                             const BasicTensor<T>& dy) {
  require_shape(dy, x.shape, "relu upstream gradient");
  BasicTensor<T> dx(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx.values[i] = x.values[i] > T{0} ? dy.values[i] : T{0};
  }
  return dx;
}

// --------------------------------------------------------------- softmax --

namespace kernels {

template <typename T>
void softmax_row(const T* x, T* y, std::size_t m) {
  const T mx = *std::max_element(x, x + m);
  T sum{0};
  for (std::size_t j = 0; j < m; ++j) {
    y[j] = std::exp(x[j] - mx);
    sum += y[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    y[j] /= sum;
  }
}

// dx = y * (dy - <dy, y>)
template <typename T>
void softmax_row_backward(const T* y, const T* dy, T* dx, std::size_t m) {
  const T inner = dot(dy, y, m);
  for (std::size_t j = 0; j < m; ++j) {
    dx[j] = y[j] * (dy[j] - inner);
  }
}

}  // namespace kernels

// Row-wise softmax over the last dimension of an [n x m] tensor.
template <typename T>
BasicTensor<T> softmax_rows(const BasicTensor<T>& x) {
  require_rank(x, 2, "softmax input");
  BasicTensor<T> y(x.shape);
  const std::size_t m = x.dim(1);
  for (std::size_t i = 0; i < x.dim(0); ++i) {
    kernels::softmax_row(x.values.data() + i * m, y.values.data() + i * m, m);
  }
  return y;
}

// Takes the forward OUTPUT y.
template <typename T>
BasicTensor<T> softmax_rows_backward(const BasicTensor<T>& y,
                                     const BasicTensor<T>& dy) {
  require_shape(dy, y.shape, "softmax upstream gradient");
  BasicTensor<T> dx(y.shape);
  const std::size_t m = y.dim(1);
  for (std::size_t i = 0; i < y.dim(0); ++i) {
    kernels::softmax_row_backward(y.values.data() + i * m,
                                  dy.values.data() + i * m,
                                  dx.values.data() + i * m, m);
  }
  return dx;
}

// ------------------------------------------------------------- embedding --

template <typename T>
struct EmbeddingTable {
  BasicTensor<T> weight;  // [16 x 8]
};

inline void check_token(std::uint8_t token, std::size_t rows) {
  if (token >= rows) {
    throw InvalidDigitError("token " + std::to_string(token) +
                            " outside [0, " + std::to_string(rows - 1) + "]");
  }
}

// Output row i is table row tokens[i]; shape [len x dim].
template <typename T>
BasicTensor<T> embedding_lookup(const EmbeddingTable<T>& table,
                                std::span<const std::uint8_t> tokens) {
  const std::size_t rows = table.weight.dim(0);
  const std::size_t dim = table.weight.dim(1);
  BasicTensor<T> out({tokens.size(), dim});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    check_token(tokens[i], rows);
    std::copy_n(table.weight.values.begin() +
                    static_cast<std::ptrdiff_t>(tokens[i] * dim),
                dim, out.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return out;
}

// Scatter-add: repeated tokens accumulate into the same table row.
template <typename T>
void embedding_backward(EmbeddingTable<T>& table,
                        std::span<const std::uint8_t> tokens,
                        const BasicTensor<T>& dout) {
  const std::size_t dim = table.weight.dim(1);
  require_shape(dout, {tokens.size(), dim}, "embedding upstream gradient");
  ensure_grad(table.weight);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    check_token(tokens[i], table.weight.dim(0));
    kernels::axpy(T{1}, dout.values.data() + i * dim,
                  table.weight.grad.data() + tokens[i] * dim, dim);
  }
}

// ------------------------------------------------------------------ lstm --

// Gate blocks are stacked in the order input, forget, candidate, output.
template <typename T>
struct LstmParams {
  BasicTensor<T> w_input;      // [4H x D]
  BasicTensor<T> w_recurrent;  // [4H x H]
  BasicTensor<T> bias;         // [4H]

  std::size_t input_dim() const { return w_input.dim(1); }
  std::size_t hidden() const { return w_recurrent.dim(1); }
};

template <typename T>
struct LstmCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<T> gates;  // [B x T x 4H], post-activation
  std::vector<T> slopes;  // [B x T x 4H], activation derivatives
  std::vector<T> cells;  // [B x T x H]
  std::vector<T> hiddens;  // [B x T x H]
};

// seq [B x T x D] -> hidden states [B x T x H]; zero initial state.
template <typename T>
BasicTensor<T> lstm_forward(const BasicTensor<T>& seq, const LstmParams<T>& p,
                            LstmCache<T>* cache = nullptr) {
  require_rank(seq, 3, "lstm input");
  const std::size_t batch = seq.dim(0);
  const std::size_t steps = seq.dim(1);
  const std::size_t d = p.input_dim();
  const std::size_t h = p.hidden();
  const std::size_t g4 = 4 * h;
  if (seq.dim(2) != d || p.w_input.dim(0) != g4 || p.w_recurrent.dim(0) != g4 ||
      p.bias.size() != g4) {
    throw ShapeError("lstm: input " + shape_string(seq.shape) +
                     " incompatible with w_input " +
                     shape_string(p.w_input.shape) + ", w_recurrent " +
                     shape_string(p.w_recurrent.shape));
  }
  if (steps == 0) {
    throw ShapeError("lstm: sequence length must be at least 1");
  }

  std::vector<T> gates(batch * steps * g4);
  std::vector<T> slopes(batch * steps * g4);
  std::vector<T> cells(batch * steps * h);
  BasicTensor<T> out({batch, steps, h});
  const auto wt_input = kernels::transpose(p.w_input.values.data(), g4, d);
  const auto wt_recurrent = kernels::transpose(p.w_recurrent.values.data(), g4, h);
  std::vector<T> z(g4);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const T* x = seq.values.data() + (b * steps + t) * d;
      const T* h_prev =
          t > 0 ? out.values.data() + (b * steps + t - 1) * h : nullptr;
      const T* c_prev = t > 0 ? cells.data() + (b * steps + t - 1) * h : nullptr;
      std::copy(p.bias.values.begin(), p.bias.values.end(), z.begin());
      for (std::size_t i = 0; i < d; ++i) {
        kernels::axpy(x[i], wt_input.data() + i * g4, z.data(), g4);
      }
      if (h_prev != nullptr) {
        for (std::size_t i = 0; i < h; ++i) {
          kernels::axpy(h_prev[i], wt_recurrent.data() + i * g4, z.data(), g4);
        }
      }
      T* g = gates.data() + (b * steps + t) * g4;
      T* sl = slopes.data() + (b * steps + t) * g4;
      T* c = cells.data() + (b * steps + t) * h;
      T* hout = out.values.data() + (b * steps + t) * h;
      for (std::size_t j = 0; j < h; ++j) {
        const T ig = kernels::sigmoid(z[j]);
        const T fg = kernels::sigmoid(z[h + j]);
        const T cand = std::tanh(z[2 * h + j]);
        const T og = kernels::sigmoid(z[3 * h + j]);
        g[j] = ig;
        g[h + j] = fg;
        g[2 * h + j] = cand;
        g[3 * h + j] = og;
        sl[j] = kernels::sigmoid_slope(z[j]);
        sl[h + j] = kernels::sigmoid_slope(z[h + j]);
        sl[2 * h + j] = kernels::tanh_slope(z[2 * h + j]);
        sl[3 * h + j] = kernels::sigmoid_slope(z[3 * h + j]);
        c[j] = ig * cand + (c_prev != nullptr ? fg * c_prev[j] : T{0});
        hout[j] = og * std::tanh(c[j]);
      }
    }
  }
  if (cache != nullptr) {
    cache->batch = batch;
    cache->steps = steps;
    cache->gates = std::move(gates);
    cache->slopes = std::move(slopes);
    cache->cells = std::move(cells);
    cache->hiddens = out.values;
  }
  return out;
}

// Backpropagation through time. `dh` is the loss gradient with respect to
// every hidden state [B x T x H]; returns the gradient for `seq`.
template <typename T>
BasicTensor<T> lstm_backward(const BasicTensor<T>& seq, LstmParams<T>& p,
                             const LstmCache<T>& cache,
                             const BasicTensor<T>& dh) {
  const std::size_t batch = cache.batch;
  const std::size_t steps = cache.steps;
  const std::size_t d = p.input_dim();
  const std::size_t h = p.hidden();
  const std::size_t g4 = 4 * h;
  require_shape(dh, {batch, steps, h}, "lstm upstream gradient");
  ensure_grad(p.w_input);
  ensure_grad(p.w_recurrent);
  ensure_grad(p.bias);

  BasicTensor<T> dx({batch, steps, d});
  std::vector<T> dz(g4);
  std::vector<T> dh_next(h);
  std::vector<T> dc_next(h);
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(dh_next.begin(), dh_next.end(), T{0});
    std::fill(dc_next.begin(), dc_next.end(), T{0});
    for (std::size_t t = steps; t-- > 0;) {
      const std::size_t row = b * steps + t;
      const T* g = cache.gates.data() + row * g4;
      const T* sl = cache.slopes.data() + row * g4;
      const T* c = cache.cells.data() + row * h;
      const T* c_prev = t > 0 ? cache.cells.data() + (row - 1) * h : nullptr;
      const T* h_prev = t > 0 ? cache.hiddens.data() + (row - 1) * h : nullptr;
      const T* dh_t = dh.values.data() + row * h;
      for (std::size_t j = 0; j < h; ++j) {
        const T ig = g[j];
        const T fg = g[h + j];
        const T cand = g[2 * h + j];
        const T og = g[3 * h + j];
        const T tc = std::tanh(c[j]);
        const T dh_total = dh_t[j] + dh_next[j];
        const T dc = dh_total * og * kernels::tanh_slope(c[j]) + dc_next[j];
        const T cp = c_prev != nullptr ? c_prev[j] : T{0};
        dz[j] = dc * cand * sl[j];
        dz[h + j] = dc * cp * sl[h + j];
        dz[2 * h + j] = dc * ig * sl[2 * h + j];
        dz[3 * h + j] = dh_total * tc * sl[3 * h + j];
        dc_next[j] = dc * fg;
      }
      const T* x = seq.values.data() + row * d;
      T* dxt = dx.values.data() + row * d;
      std::fill(dh_next.begin(), dh_next.end(), T{0});
      for (std::size_t r = 0; r < g4; ++r) {
        const T dzr = dz[r];
        p.bias.grad[r] += dzr;
        kernels::axpy(dzr, x, p.w_input.grad.data() + r * d, d);
        kernels::axpy(dzr, p.w_input.values.data() + r * d, dxt, d);
        if (h_prev != nullptr) {
          kernels::axpy(dzr, h_prev, p.w_recurrent.grad.data() + r * h, h);
          kernels::axpy(dzr, p.w_recurrent.values.data() + r * h,
                        dh_next.data(), h);
        }
      }
    }
  }
  return dx;
}

// -------------------------------------------------------- self-attention --

template <typename T>
struct AttentionParams {
  BasicTensor<T> w_query;  // [D x D]
  BasicTensor<T> w_key;    // [D x D]
  BasicTensor<T> w_value;  // [D x D]

  std::size_t dim() const { return w_query.dim(0); }
};

template <typename T>
struct AttentionCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<T> q, k, v;  // [B x T x D]
  std::vector<T> probs;    // [B x T x T]
};

// Single head. Q = X Wq, K = X Wk, V = X Wv, out = softmax(Q K^T / sqrt(D)) V
// for each sequence of seq [B x T x D].
template <typename T>
BasicTensor<T> self_attention(const BasicTensor<T>& seq,
                              const AttentionParams<T>& p,
                              AttentionCache<T>* cache = nullptr) {
  require_rank(seq, 3, "attention input");
  const std::size_t batch = seq.dim(0);
  const std::size_t steps = seq.dim(1);
  const std::size_t d = p.dim();
  for (const auto* w : {&p.w_query, &p.w_key, &p.w_value}) {
    require_shape(*w, {d, d}, "attention weight");
  }
  if (seq.dim(2) != d) {
    throw ShapeError("attention: input " + shape_string(seq.shape) +
                     " incompatible with weights " +
                     shape_string(p.w_query.shape));
  }
  if (steps == 0) {
    throw ShapeError("attention: sequence length must be at least 1");
  }
  const T scale = T{1} / std::sqrt(static_cast<T>(d));
  const std::size_t rows = batch * steps;
  std::vector<T> q(rows * d), k(rows * d), v(rows * d);
  kernels::matmul_nn(seq.values.data(), p.w_query.values.data(), q.data(), rows,
                     d, d, false);
  kernels::matmul_nn(seq.values.data(), p.w_key.values.data(), k.data(), rows,
                     d, d, false);
  kernels::matmul_nn(seq.values.data(), p.w_value.values.data(), v.data(), rows,
                     d, d, false);

  std::vector<T> probs(batch * steps * steps);
  std::vector<T> scores(steps);
  BasicTensor<T> out({batch, steps, d});
  for (std::size_t b = 0; b < batch; ++b) {
    const T* qb = q.data() + b * steps * d;
    const T* kb = k.data() + b * steps * d;
    const T* vb = v.data() + b * steps * d;
    for (std::size_t i = 0; i < steps; ++i) {
      for (std::size_t j = 0; j < steps; ++j) {
        scores[j] = kernels::dot(qb + i * d, kb + j * d, d) * scale;
      }
      T* pr = probs.data() + (b * steps + i) * steps;
      kernels::softmax_row(scores.data(), pr, steps);
      T* o = out.values.data() + (b * steps + i) * d;
      for (std::size_t j = 0; j < steps; ++j) {
        kernels::axpy(pr[j], vb + j * d, o, d);
      }
    }
  }
  if (cache != nullptr) {
    cache->batch = batch;
    cache->steps = steps;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
  }
  return out;
}

template <typename T>
BasicTensor<T> self_attention_backward(const BasicTensor<T>& seq,
                                       AttentionParams<T>& p,
                                       const AttentionCache<T>& cache,
                                       const BasicTensor<T>& dout) {
  const std::size_t batch = cache.batch;
  const std::size_t steps = cache.steps;
  const std::size_t d = p.dim();
  require_shape(dout, {batch, steps, d}, "attention upstream gradient");
  ensure_grad(p.w_query);
  ensure_grad(p.w_key);
  ensure_grad(p.w_value);
  const T scale = T{1} / std::sqrt(static_cast<T>(d));
  const std::size_t rows = batch * steps;

  std::vector<T> dq(rows * d, T{0}), dk(rows * d, T{0}), dv(rows * d, T{0});
  std::vector<T> dp(steps), ds(steps);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * steps * d;
    for (std::size_t i = 0; i < steps; ++i) {
      const T* pr = cache.probs.data() + (b * steps + i) * steps;
      const T* g = dout.values.data() + base + i * d;
      for (std::size_t j = 0; j < steps; ++j) {
        dp[j] = kernels::dot(g, cache.v.data() + base + j * d, d);
        kernels::axpy(pr[j], g, dv.data() + base + j * d, d);
      }
      kernels::softmax_row_backward(pr, dp.data(), ds.data(), steps);
      for (std::size_t j = 0; j < steps; ++j) {
        const T s = ds[j] * scale;
        kernels::axpy(s, cache.k.data() + base + j * d,
                      dq.data() + base + i * d, d);
        kernels::axpy(s, cache.q.data() + base + i * d,
                      dk.data() + base + j * d, d);
      }
    }
  }
  // dW += X^T dQ etc.; dX = dQ Wq^T + dK Wk^T + dV Wv^T
  const T* x = seq.values.data();
  kernels::matmul_tn(x, dq.data(), p.w_query.grad.data(), d, rows, d, true);
  kernels::matmul_tn(x, dk.data(), p.w_key.grad.data(), d, rows, d, true);
  kernels::matmul_tn(x, dv.data(), p.w_value.grad.data(), d, rows, d, true);
  BasicTensor<T> dx({batch, steps, d});
  kernels::matmul_nt(dq.data(), p.w_query.values.data(), dx.values.data(), rows,
                     d, d, false);
  kernels::matmul_nt(dk.data(), p.w_key.values.data(), dx.values.data(), rows,
                     d, d, true);
  kernels::matmul_nt(dv.data(), p.w_value.values.data(), dx.values.data(),
                     rows, d, d, true);
  return dx;
}

// ------------------------------------------------------------------- mse --

template <typename T>
T mse(std::span<const T> pred, std::span<const T> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("mse: prediction length " + std::to_string(pred.size()) +
                     " differs from target length " +
                     std::to_string(target.size()));
  }
  if (pred.empty()) {
    throw ShapeError("mse: empty input");
  }
  T sum{0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T e = pred[i] - target[i];
    sum += e * e;
  }
  return sum / static_cast<T>(pred.size());
}

// d mse / d pred = 2 (pred - target) / n, scaled by the upstream `scale`.
template <typename T>
std::vector<T> mse_backward(std::span<const T> pred, std::span<const T> target,
                            T scale = T{1}) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError("mse_backward: mismatched or empty input");
  }
  std::vector<T> d(pred.size());
  const T k = T{2} * scale / static_cast<T>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    d[i] = k * (pred[i] - target[i]);
  }
  return d;
}

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_LAYERS_HPP_
