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

// Central finite-difference gradient checking.

#ifndef HEXNAS_NUMCORE_GRADCHECK_HPP_
#define HEXNAS_NUMCORE_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "hexnas/errors.hpp"

namespace hexnas::numcore {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

inline double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

inline GradCheckResult compare_gradients(std::span<const double> analytic,
                                         std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw ShapeError("gradient check: analytic and numeric lengths differ");
  }
  GradCheckResult r;
  r.coordinates = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double e = relative_error(analytic[i], numeric[i]);
    if (e > r.max_rel_error || i == 0) {
      r.max_rel_error = std::max(e, r.max_rel_error);
      r.worst_index = i;
      r.analytic = analytic[i];
      r.numeric = numeric[i];
    }
  }
  return r;
}

// A loss callable evaluates the loss at `params`. When `grad_out` is
// nonempty it also writes the analytic gradient there.
template <typename F, typename T>
concept LossCallable = requires(F f, std::span<const T> p, std::span<T> g) {
  { f(p, g) } -> std::convertible_to<T>;
};

// (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) for every coordinate i.
template <typename T, LossCallable<T> F>
std::vector<double> numeric_gradient(F&& loss, std::span<const T> params,
                                     T eps) {
  if (!(eps > T{0})) {
    throw ConfigError("gradient check: eps must be positive");
  }
  std::vector<T> x(params.begin(), params.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T saved = x[i];
    x[i] = saved + eps;
    const T plus = loss(std::span<const T>(x), std::span<T>());
    x[i] = saved - eps;
    const T minus = loss(std::span<const T>(x), std::span<T>());
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("gradient check: non-finite loss at coordinate " +
                         std::to_string(i));
    }
    out[i] = static_cast<double>((plus - minus) / (T{2} * eps));
  }
  return out;
}

// Compares the analytic gradient reported by `loss` against central
// differences, coordinate by coordinate. Relative error uses the
// max(|analytic|, |numeric|, 1e-8) denominator.
template <typename T, LossCallable<T> F>
GradCheckResult grad_check(F&& loss, std::span<const T> params, T eps) {
  std::vector<T> grad(params.size(), T{0});
  const T value = loss(params, std::span<T>(grad));
  if (!std::isfinite(value)) {
    throw NumericError("gradient check: non-finite loss at the base point");
  }
  const std::vector<double> analytic(grad.begin(), grad.end());
  const auto numeric = numeric_gradient<T>(loss, params, eps);
  return compare_gradients(analytic, numeric);
}

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_GRADCHECK_HPP_
