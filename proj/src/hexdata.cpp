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

#include "hexnas/hexdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <optional>

#include "hexnas/errors.hpp"
#include "hexnas/random.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::hexdata {
namespace {

constexpr std::string_view kHeader = "a_hex,b_hex,target_raw,target_norm";
constexpr char kHexChars[] = "0123456789ABCDEF";

std::optional<HexOperand> parse_operand(std::string_view text) {
  if (text.size() != kCanonicalWidth) {
    return std::nullopt;
  }
  HexOperand out;
  for (int i = 0; i < kCanonicalWidth; ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      out.digits[i] = static_cast<std::uint8_t>(c - '0');
    } else if (c >= 'A' && c <= 'F') {
      out.digits[i] = static_cast<std::uint8_t>(c - 'A' + 10);
    } else {
      return std::nullopt;
    }
  }
  return out;
}

bool row_matches(const Sample& s, Operation op, int width) {
  const std::uint32_t a = s.a.value();
  const std::uint32_t b = s.b.value();
  const std::uint32_t hi = max_operand(width);
  if (a > hi || b > hi) {
    return false;
  }
  if ((op == Operation::Mul || op == Operation::Div) && (a == 0 || b == 0)) {
    return false;
  }
  const double raw = raw_target(op, a, b);
  return raw == s.target_raw &&
         normalize_target(op, width, raw) == s.target_norm;
}

}  // namespace

std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::Add:
      return "add";
    case Operation::Sub:
      return "sub";
    case Operation::Mul:
      return "mul";
    case Operation::Div:
      return "div";
  }
  return "?";
}

Operation parse_operation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const Operation op : kAllOperations) {
    if (lower == to_string(op)) {
      return op;
    }
  }
  throw ConfigError("unknown operation '" + std::string(name) +
                    "' (expected add, sub, mul or div)");
}

std::uint32_t HexOperand::value() const {
  return static_cast<std::uint32_t>(from_hex(digits));
}

std::string HexOperand::to_text() const {
  std::string out(kCanonicalWidth, '0');
  for (int i = 0; i < kCanonicalWidth; ++i) {
    out[i] = kHexChars[digits[i] & 0xF];
  }
  return out;
}

HexOperand make_operand(std::uint32_t value) {
  const auto tokens = to_hex(value, kCanonicalWidth);
  HexOperand out;
  std::copy(tokens.begin(), tokens.end(), out.digits.begin());
  return out;
}

std::vector<std::uint8_t> to_hex(std::uint64_t n, int width) {
  if (width < 1 || width > 15) {
    throw RangeError("hex width " + std::to_string(width) +
                     " outside [1, 15]");
  }
  const std::uint64_t limit = std::uint64_t{1} << (4 * width);
  if (n >= limit) {
    throw RangeError("value " + std::to_string(n) + " does not fit in " +
                     std::to_string(width) + " hex digits");
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width));
  for (int i = width - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n & 0xF);
    n >>= 4;
  }
  return out;
}

std::uint64_t from_hex(std::span<const std::uint8_t> tokens) {
  std::uint64_t n = 0;
  for (const std::uint8_t t : tokens) {
    if (t >= kHexBase) {
      throw InvalidDigitError("hex digit token " + std::to_string(t) +
                              " outside [0, 15]");
    }
    n = n * kHexBase + t;
  }
  return n;
}

double raw_target(Operation op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case Operation::Add:
      return static_cast<double>(a + b);
    case Operation::Sub:
      return static_cast<double>(a - b);
    case Operation::Mul:
    case Operation::Div:
      if (a <= 0 || b <= 0) {
        throw DomainError(std::string(to_string(op)) +
                          " target needs positive operands, got " +
                          std::to_string(a) + " and " + std::to_string(b));
      }
      if (op == Operation::Mul) {
        // a*b < 2^32, exact in a double
        return std::log(static_cast<double>(a) * static_cast<double>(b));
      }
      // log1p of the exact difference; no cancellation when a is close to b
      if (a >= b) {
        return std::log1p(static_cast<double>(a - b) / static_cast<double>(b));
      }
      return -std::log1p(static_cast<double>(b - a) / static_cast<double>(a));
  }
  return 0.0;
}

std::uint32_t max_operand(int value_width) {
  check_value_width(value_width);
  return (std::uint32_t{1} << (4 * value_width)) - 1;
}

void check_value_width(int value_width) {
  if (value_width < 2 || value_width > kCanonicalWidth) {
    throw ConfigError("value width " + std::to_string(value_width) +
                      " not in {2, 3, 4}");
  }
}

double normalizer(Operation op, int value_width) {
  const double hi = max_operand(value_width);
  switch (op) {
    case Operation::Add:
      return 2.0 * hi;
    case Operation::Sub:
      return hi;
    case Operation::Mul:
      return 2.0 * std::log(hi);
    case Operation::Div:
      return std::log(hi);
  }
  return 1.0;
}

double normalize_target(Operation op, int value_width, double raw) {
  return raw / normalizer(op, value_width);
}

Dataset generate_dataset(Operation op, int value_width, std::size_t count,
                         std::uint64_t seed) {
  check_value_width(value_width);
  if (count == 0) {
    throw ConfigError("dataset count must be at least 1");
  }
  const std::int64_t hi = max_operand(value_width);
  const std::int64_t lo =
      (op == Operation::Mul || op == Operation::Div) ? 1 : 0;

  Dataset ds;
  ds.op = op;
  ds.value_width = value_width;
  ds.seed = seed;
  ds.samples.reserve(count);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t a = rng.between(lo, hi);
    const std::int64_t b = rng.between(lo, hi);
    Sample s;
    s.a = make_operand(static_cast<std::uint32_t>(a));
    s.b = make_operand(static_cast<std::uint32_t>(b));
    s.target_raw = raw_target(op, a, b);
    s.target_norm = normalize_target(op, value_width, s.target_raw);
    ds.samples.push_back(s);
  }
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(ds.count())));
  if (n_train == 0 || n_train == ds.count()) {
    throw ConfigError("split of " + std::to_string(ds.count()) +
                      " samples at fraction " + format_real(train_fraction) +
                      " leaves an empty part");
  }
  std::vector<std::size_t> order(ds.count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));

  Dataset train{ds.op, ds.value_width, derive_seed(ds.seed, 1), {}};
  Dataset rest{ds.op, ds.value_width, derive_seed(ds.seed, 2), {}};
  train.samples.reserve(n_train);
  rest.samples.reserve(ds.count() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : rest).samples.push_back(ds.samples[order[i]]);
  }
  return {std::move(train), std::move(rest)};
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  out.reserve(32 * (ds.count() + 1));
  out += kHeader;
  out += '\n';
  for (const Sample& s : ds.samples) {
    out += s.a.to_text();
    out += ',';
    out += s.b.to_text();
    out += ',';
    out += format_real(s.target_raw);
    out += ',';
    out += format_real(s.target_norm);
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(ds));
}

Dataset parse_dataset(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  if (lines.empty() || lines.front() != kHeader) {
    throw ParseError("expected header '" + std::string(kHeader) + "'", 1);
  }
  Dataset ds;
  ds.samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, found " +
                           std::to_string(fields.size()),
                       i + 1);
    }
    const auto a = parse_operand(fields[0]);
    const auto b = parse_operand(fields[1]);
    const auto raw = parse_real(fields[2]);
    const auto norm = parse_real(fields[3]);
    if (!a || !b) {
      throw ParseError("operand is not 4 uppercase hex digits", i + 1);
    }
    if (!raw || !norm) {
      throw ParseError("malformed real value", i + 1);
    }
    ds.samples.push_back(Sample{*a, *b, *raw, *norm});
  }
  if (ds.samples.empty()) {
    throw ParseError("dataset has no rows", 1);
  }

  for (const Operation op : kAllOperations) {
    for (int width = 2; width <= kCanonicalWidth; ++width) {
      const bool all = std::all_of(
          ds.samples.begin(), ds.samples.end(),
          [&](const Sample& s) { return row_matches(s, op, width); });
      if (all) {
        ds.op = op;
        ds.value_width = width;
        return ds;
      }
    }
  }
  // Report the first row that no single (op, width) explains.
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    bool any = false;
    for (const Operation op : kAllOperations) {
      for (int width = 2; width <= kCanonicalWidth && !any; ++width) {
        any = row_matches(ds.samples[i], op, width);
      }
    }
    if (!any) {
      throw ParseError("targets do not match any operation and width", i + 2);
    }
  }
  throw ParseError("rows mix operations or widths", 2);
}

Dataset read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

std::array<std::uint8_t, 2 * kCanonicalWidth> tokens_of(const Sample& s) {
  std::array<std::uint8_t, 2 * kCanonicalWidth> t{};
  std::copy(s.a.digits.begin(), s.a.digits.end(), t.begin());
  std::copy(s.b.digits.begin(), s.b.digits.end(),
            t.begin() + kCanonicalWidth);
  return t;
}

}  // namespace hexnas::hexdata
