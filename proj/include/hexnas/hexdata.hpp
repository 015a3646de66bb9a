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

// Arithmetic datasets over fixed-width hexadecimal operands.
//
// Operands are always encoded with four digit tokens (most significant
// first). A dataset's `value_width` only restricts the operand values: a
// width-2 dataset draws operands from [0, 0xFF] and encodes them as
// 00XX. This keeps the model input layout identical across widths, which the
// 2-digit-train / 4-digit-test protocol depends on.
//
// Targets for Mul and Div live in the natural-log domain, so all four
// operations become additive problems.

#ifndef HEXNAS_HEXDATA_HPP_
#define HEXNAS_HEXDATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hexnas::hexdata {

inline constexpr int kCanonicalWidth = 4;
inline constexpr int kHexBase = 16;
// Default desk-scale and the paper-scale sample counts.
inline constexpr std::size_t kDeskCount = 10'000;
inline constexpr std::size_t kFullCount = 500'000;

enum class Operation { Add, Sub, Mul, Div };

inline constexpr std::array<Operation, 4> kAllOperations = {
    Operation::Add, Operation::Sub, Operation::Mul, Operation::Div};

std::string_view to_string(Operation op);
// Accepts "add", "sub", "mul", "div" (case-insensitive). Throws ConfigError.
Operation parse_operation(std::string_view name);

using Digits = std::array<std::uint8_t, kCanonicalWidth>;

struct HexOperand {
  Digits digits{};

  std::uint32_t value() const;
  // Uppercase zero-padded 4-character form, e.g. "00FF".
  std::string to_text() const;

  friend bool operator==(const HexOperand&, const HexOperand&) = default;
};

HexOperand make_operand(std::uint32_t value);

struct Sample {
  HexOperand a;
  HexOperand b;
  double target_raw = 0.0;
  double target_norm = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  Operation op = Operation::Add;
  int value_width = kCanonicalWidth;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t count() const { return samples.size(); }

  // Content equality; `seed` is provenance and does not participate.
  friend bool operator==(const Dataset& x, const Dataset& y) {
    return x.op == y.op && x.value_width == y.value_width &&
           x.samples == y.samples;
  }
};

// `width` tokens for n, most significant first. Throws RangeError unless
// 0 <= n < 16^width.
std::vector<std::uint8_t> to_hex(std::uint64_t n, int width);

// Throws InvalidDigitError for tokens outside [0, 15].
std::uint64_t from_hex(std::span<const std::uint8_t> tokens);

// Add: a+b, Sub: a-b, Mul: ln a + ln b, Div: ln a - ln b.
// Throws DomainError for a nonpositive Mul/Div operand.
double raw_target(Operation op, std::int64_t a, std::int64_t b);

// Divisor that maps raw targets of the given width into [-1, 1].
double normalizer(Operation op, int value_width);

double normalize_target(Operation op, int value_width, double raw);

// Largest operand value for the width, 16^w - 1.
std::uint32_t max_operand(int value_width);

// Throws ConfigError unless width is 2, 3 or 4.
void check_value_width(int value_width);

// Draws `count` operand pairs uniformly from [0, 16^w - 1] (Add, Sub) or
// [1, 16^w - 1] (Mul, Div). Sequential, so the result depends only on the
// arguments. Throws ConfigError for count == 0 or an invalid width.
Dataset generate_dataset(Operation op, int value_width, std::size_t count,
                         std::uint64_t seed);

// Shuffled disjoint split. The train part holds floor(fraction * count)
// samples. Throws ConfigError unless 0 < fraction < 1 and both parts are
// nonempty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double train_fraction,
                                          std::uint64_t seed);

// CSV with header `a_hex,b_hex,target_raw,target_norm`.
std::string serialize_dataset(const Dataset& ds);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// The operation and width are not stored in the CSV. They are recovered as
// the first (op, width) whose target formula and normalizer reproduce every
// row exactly. The seed is not recoverable and reads back as 0. Throws
// ParseError with the offending line number.
Dataset parse_dataset(std::string_view text);
Dataset read_dataset(const std::filesystem::path& path);

// Model input: a.digits followed by b.digits.
std::array<std::uint8_t, 2 * kCanonicalWidth> tokens_of(const Sample& s);

}  // namespace hexnas::hexdata

#endif  // HEXNAS_HEXDATA_HPP_
