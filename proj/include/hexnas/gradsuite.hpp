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

// Seeded finite-difference checks for every layer and the three models.
//
// Layer cases differentiate a random projection sum(r * out) with respect to
// the layer inputs and parameters together. Model cases differentiate the
// batch MSE with respect to every model parameter, embedding included.

#ifndef HEXNAS_GRADSUITE_HPP_
#define HEXNAS_GRADSUITE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "hexnas/numcore/gradcheck.hpp"

namespace hexnas::gradsuite {

enum class Precision { Double, Single };

inline constexpr double kDoubleTolerance = 1e-6;
inline constexpr double kSingleTolerance = 1e-4;
inline constexpr double kStep = 1e-5;
inline constexpr int kInstances = 10;

std::string_view to_string(Precision p);
// "double" or "single"; throws ConfigError.
Precision parse_precision(std::string_view name);
double tolerance(Precision p);

// linear relu softmax embedding lstm attention mse fc lstm-model attn-model
std::span<const std::string_view> case_names();
bool is_model_case(std::string_view name);

struct CaseReport {
  std::string name;
  Precision precision = Precision::Double;
  int instances = 0;
  // Worst instance over the run.
  int worst_instance = 0;
  numcore::GradCheckResult worst;
  std::size_t coordinates = 0;  // summed over instances

  bool passed() const { return worst.max_rel_error < tolerance(precision); }
};

// Instance k draws from derive_seed(seed, k). The analytic gradient comes
// from the double (or float) backward pass; the central differences are
// taken in long double at the same point, so rounding in the difference
// quotient does not mask or fake agreement on small coordinates. Model cases
// difference an independent long double forward rebuilt from the layers,
// after checking it reproduces the model's loss. Model cases run in double
// only; asking for single throws ConfigError, as does an unknown name.
CaseReport run_case(std::string_view name, std::uint64_t seed,
                    Precision precision = Precision::Double,
                    int instances = kInstances);

// "lstm double n=10 max_rel_error=... at instance 3 coordinate 17 ..."
std::string describe(const CaseReport& report);

}  // namespace hexnas::gradsuite

#endif  // HEXNAS_GRADSUITE_HPP_
