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

#ifndef HEXNAS_NUMCORE_TENSOR_HPP_
#define HEXNAS_NUMCORE_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hexnas/errors.hpp"

namespace hexnas::numcore {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      out += "x";
    }
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major tensor. `grad` is either empty (no gradient attached) or
// the same length as `values`.
template <typename T>
struct BasicTensor {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;

  BasicTensor() = default;
  explicit BasicTensor(Shape s, T fill = T{0})
      : shape(std::move(s)), values(shape_size(shape), fill) {}
  BasicTensor(Shape s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    if (shape_size(shape) != values.size()) {
      throw ShapeError("tensor shape " + shape_string(shape) + " needs " +
                       std::to_string(shape_size(shape)) + " values, got " +
                       std::to_string(values.size()));
    }
  }

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  bool has_grad() const { return !grad.empty(); }

  // Attaches a zeroed gradient buffer, or clears the existing one.
  void zero_grad() { grad.assign(values.size(), T{0}); }

  std::span<T> data() { return values; }
  std::span<const T> data() const { return values; }

  T& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
  T at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }

  friend bool operator==(const BasicTensor& x, const BasicTensor& y) {
    return x.shape == y.shape && x.values == y.values;
  }
};

using Tensor = BasicTensor<double>;

template <typename T>
void require_shape(const BasicTensor<T>& t, const Shape& expected,
                   const char* what) {
  if (t.shape != expected) {
    throw ShapeError(std::string(what) + ": expected " +
                     shape_string(expected) + ", got " +
                     shape_string(t.shape));
  }
}

template <typename T>
void require_rank(const BasicTensor<T>& t, std::size_t rank,
                  const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_string(t.shape));
  }
}

// Flat views over a list of parameter tensors, in list order.
template <typename T>
std::size_t total_size(std::span<BasicTensor<T>* const> tensors) {
  std::size_t n = 0;
  for (const auto* t : tensors) {
    n += t->size();
  }
  return n;
}

template <typename T>
std::vector<T> flatten_values(std::span<BasicTensor<T>* const> tensors) {
  std::vector<T> out;
  out.reserve(total_size(tensors));
  for (const auto* t : tensors) {
    out.insert(out.end(), t->values.begin(), t->values.end());
  }
  return out;
}

template <typename T>
std::vector<T> flatten_grads(std::span<BasicTensor<T>* const> tensors) {
  std::vector<T> out;
  out.reserve(total_size(tensors));
  for (const auto* t : tensors) {
    if (t->has_grad()) {
      out.insert(out.end(), t->grad.begin(), t->grad.end());
    } else {
      out.insert(out.end(), t->size(), T{0});
    }
  }
  return out;
}

template <typename T>
void assign_values(std::span<BasicTensor<T>* const> tensors,
                   std::span<const T> flat) {
  if (flat.size() != total_size(tensors)) {
    throw ShapeError("flat parameter vector has " +
                     std::to_string(flat.size()) + " entries, expected " +
                     std::to_string(total_size(tensors)));
  }
  std::size_t offset = 0;
  for (auto* t : tensors) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), t->size(),
                t->values.begin());
    offset += t->size();
  }
}

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_TENSOR_HPP_
