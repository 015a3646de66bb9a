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

// Independent target oracles: exact integers for Add/Sub, 256-bit MPFR logs
// for Mul/Div.

#ifndef HEXNAS_TESTS_ORACLE_HPP_
#define HEXNAS_TESTS_ORACLE_HPP_

#include <mpfr.h>

#include <cmath>
#include <cstdint>

#include "hexnas/hexdata.hpp"

namespace oracle {

inline constexpr mpfr_prec_t kBits = 256;

class Big {
 public:
  Big() { mpfr_init2(v_, kBits); }
  ~Big() { mpfr_clear(v_); }
  Big(const Big&) = delete;
  Big& operator=(const Big&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// ln a + sign * ln b, rounded once to double.
inline double log_pair(std::uint32_t a, std::uint32_t b, int sign) {
  Big la, lb;
  mpfr_set_ui(la.get(), a, MPFR_RNDN);
  mpfr_log(la.get(), la.get(), MPFR_RNDN);
  mpfr_set_ui(lb.get(), b, MPFR_RNDN);
  mpfr_log(lb.get(), lb.get(), MPFR_RNDN);
  if (sign > 0) {
    mpfr_add(la.get(), la.get(), lb.get(), MPFR_RNDN);
  } else {
    mpfr_sub(la.get(), la.get(), lb.get(), MPFR_RNDN);
  }
  return mpfr_get_d(la.get(), MPFR_RNDN);
}

// exp(raw) against a*b (sign > 0) or a/b, relative error in high precision.
inline double exp_relative_error(double raw, std::uint32_t a, std::uint32_t b,
                                 int sign) {
  Big e, want;
  mpfr_set_d(e.get(), raw, MPFR_RNDN);
  mpfr_exp(e.get(), e.get(), MPFR_RNDN);
  mpfr_set_ui(want.get(), a, MPFR_RNDN);
  if (sign > 0) {
    mpfr_mul_ui(want.get(), want.get(), b, MPFR_RNDN);
  } else {
    mpfr_div_ui(want.get(), want.get(), b, MPFR_RNDN);
  }
  mpfr_sub(e.get(), e.get(), want.get(), MPFR_RNDN);
  mpfr_div(e.get(), e.get(), want.get(), MPFR_RNDN);
  return std::abs(mpfr_get_d(e.get(), MPFR_RNDN));
}

// Raw target by the independent route.
inline double target(hexnas::hexdata::Operation op, std::uint32_t a,
                     std::uint32_t b) {
  using hexnas::hexdata::Operation;
  switch (op) {
    case Operation::Add:
      return static_cast<double>(std::int64_t{a} + std::int64_t{b});
    case Operation::Sub:
      return static_cast<double>(std::int64_t{a} - std::int64_t{b});
    case Operation::Mul:
      return log_pair(a, b, +1);
    case Operation::Div:
      return log_pair(a, b, -1);
  }
  return NAN;
}

inline double relative(double got, double want) {
  const double d = std::abs(want);
  return d == 0.0 ? std::abs(got) : std::abs(got - want) / d;
}

}  // namespace oracle

#endif  // HEXNAS_TESTS_ORACLE_HPP_
