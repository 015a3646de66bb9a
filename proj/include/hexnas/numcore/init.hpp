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

// Seeded parameter initialization. Weights are uniform with variance
// 1/fan_in, i.e. drawn from [-sqrt(3/fan_in), sqrt(3/fan_in)]; biases are
// zero; embedding rows are standard normal.

#ifndef HEXNAS_NUMCORE_INIT_HPP_
#define HEXNAS_NUMCORE_INIT_HPP_

#include <cmath>
#include <string>

#include "hexnas/errors.hpp"
#include "hexnas/numcore/layers.hpp"
#include "hexnas/random.hpp"

namespace hexnas::numcore {

inline void check_dims(std::initializer_list<std::size_t> dims,
                       const char* what) {
  for (const std::size_t d : dims) {
    if (d == 0) {
      throw ConfigError(std::string(what) + ": dimensions must be positive");
    }
  }
}

template <typename T>
BasicTensor<T> uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng) {
  BasicTensor<T> t(std::move(shape));
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (T& v : t.values) {
    v = static_cast<T>(rng.uniform(-bound, bound));
  }
  return t;
}

template <typename T>
LinearParams<T> make_linear(std::size_t in, std::size_t out, Rng& rng) {
  check_dims({in, out}, "linear");
  return {uniform_fan_in<T>({out, in}, in, rng), BasicTensor<T>({out})};
}

template <typename T>
EmbeddingTable<T> make_embedding(Rng& rng, std::size_t rows = kEmbeddingRows,
                                 std::size_t dim = kEmbeddingDim) {
  check_dims({rows, dim}, "embedding");
  BasicTensor<T> w({rows, dim});
  for (T& v : w.values) {
    v = static_cast<T>(rng.normal());
  }
  return {std::move(w)};
}

// Recurrent and input weights share the 1/sqrt(hidden) scale, matching the
// usual LSTM convention.
template <typename T>
LstmParams<T> make_lstm(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  check_dims({input_dim, hidden}, "lstm");
  return {uniform_fan_in<T>({4 * hidden, input_dim}, hidden, rng),
          uniform_fan_in<T>({4 * hidden, hidden}, hidden, rng),
          BasicTensor<T>({4 * hidden})};
}

template <typename T>
AttentionParams<T> make_attention(std::size_t dim, Rng& rng) {
  check_dims({dim}, "attention");
  auto wq = uniform_fan_in<T>({dim, dim}, dim, rng);
  auto wk = uniform_fan_in<T>({dim, dim}, dim, rng);
  auto wv = uniform_fan_in<T>({dim, dim}, dim, rng);
  return {std::move(wq), std::move(wk), std::move(wv)};
}

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_INIT_HPP_
