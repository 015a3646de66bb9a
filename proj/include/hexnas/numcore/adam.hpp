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

#ifndef HEXNAS_NUMCORE_ADAM_HPP_
#define HEXNAS_NUMCORE_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hexnas/errors.hpp"
#include "hexnas/numcore/tensor.hpp"

namespace hexnas::numcore {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::uint64_t step = 0;
  std::vector<T> first_moment;
  std::vector<T> second_moment;
  AdamHyper hyper;

  AdamState() = default;
  AdamState(std::size_t n, AdamHyper h)
      : first_moment(n, T{0}), second_moment(n, T{0}), hyper(h) {}
};

// One bias-corrected Adam update of `params` in place.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) +
                     " params, " + std::to_string(grads.size()) +
                     " grads, " + std::to_string(state.first_moment.size()) +
                     " moments");
  }
  ++state.step;
  const auto& h = state.hyper;
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T correction1 =
      static_cast<T>(1.0 - std::pow(h.beta1, static_cast<double>(state.step)));
  const T correction2 =
      static_cast<T>(1.0 - std::pow(h.beta2, static_cast<double>(state.step)));
  const T lr = static_cast<T>(h.lr);
  const T eps = static_cast<T>(h.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    T& m = state.first_moment[i];
    T& v = state.second_moment[i];
    m = b1 * m + (T{1} - b1) * g;
    v = b2 * v + (T{1} - b2) * g * g;
    const T m_hat = m / correction1;
    const T v_hat = v / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

// Adam over a fixed list of tensors, one moment buffer per tensor.
template <typename T>
class Adam {
 public:
  Adam(std::span<BasicTensor<T>* const> params, AdamHyper hyper) {
    states_.reserve(params.size());
    for (const auto* p : params) {
      states_.emplace_back(p->size(), hyper);
    }
  }

  void step(std::span<BasicTensor<T>* const> params) {
    if (params.size() != states_.size()) {
      throw ShapeError("adam: parameter list changed size");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      if (!p.has_grad()) {
        continue;
      }
      adam_step<T>(p.values, p.grad, states_[i]);
    }
  }

  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  std::vector<AdamState<T>> states_;
};

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_ADAM_HPP_
