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

#include <cmath>
#include <cstring>

#include "doctest.h"
#include "hexnas/gradsuite.hpp"
#include "hexnas/numcore/adam.hpp"
#include "hexnas/numcore/checkpoint.hpp"
#include "hexnas/numcore/gradcheck.hpp"
#include "hexnas/numcore/init.hpp"
#include "hexnas/numcore/layers.hpp"

using namespace hexnas;
using namespace hexnas::numcore;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("tensor shape must match its values") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK_FALSE(t.has_grad());
  t.zero_grad();
  CHECK(t.grad.size() == 6);
}

TEST_CASE("linear forward by hand") {
  LinearParams<double> p{Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2}, {0.5, -1})};
  const Tensor x({1, 2}, {1, 1});
  const Tensor y = linear_forward(x, p);
  CHECK(y.values == std::vector<double>{3.5, 6.0});
  CHECK_THROWS_AS(linear_forward(Tensor({1, 3}), p), ShapeError);
}

TEST_CASE("linear backward by hand") {
  LinearParams<double> p{Tensor({1, 2}, {2, -3}), Tensor({1}, {0})};
  const Tensor x({2, 2}, {1, 2, 3, 4});
  const Tensor dy({2, 1}, {1, 10});
  const Tensor dx = linear_backward(x, p, dy);
  CHECK(dx.values == std::vector<double>{2, -3, 20, -30});
  CHECK(p.weight.grad == std::vector<double>{31, 42});
  CHECK(p.bias.grad == std::vector<double>{11});
  // gradients accumulate
  linear_backward(x, p, dy);
  CHECK(p.bias.grad == std::vector<double>{22});
}

TEST_CASE("relu mask and subgradient at zero") {
  const Tensor x({1, 3}, {-1, 0, 2});
  CHECK(relu_forward(x).values == std::vector<double>{0, 0, 2});
  const Tensor dy({1, 3}, {5, 5, 5});
  CHECK(relu_backward(x, dy).values == std::vector<double>{0, 0, 5});
}

TEST_CASE("softmax of [0, ln 3] is [1/4, 3/4]") {
  const Tensor y = softmax_rows(Tensor({1, 2}, {0.0, std::log(3.0)}));
  CHECK(y.values[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(y.values[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("softmax is shift invariant and stable") {
  const Tensor y = softmax_rows(Tensor({1, 3}, {1000, 1001, 1002}));
  const Tensor z = softmax_rows(Tensor({1, 3}, {0, 1, 2}));
  for (int i = 0; i < 3; ++i) {
    CHECK(y.values[i] == doctest::Approx(z.values[i]).epsilon(1e-14));
  }
}

TEST_CASE("mse of [3,4] against zeros is 12.5") {
  const std::vector<double> p = {3, 4}, t = {0, 0};
  CHECK(mse<double>(p, t) == 12.5);
  CHECK(mse_backward<double>(p, t) == std::vector<double>{3, 4});
  CHECK_THROWS_AS(mse<double>(p, std::vector<double>{1}), ShapeError);
}

TEST_CASE("embedding lookup and scatter-add backward") {
  EmbeddingTable<double> table{Tensor({16, 2})};
  for (std::size_t i = 0; i < 32; ++i) table.weight.values[i] = double(i);
  const std::vector<std::uint8_t> tokens = {5, 5, 1};
  const Tensor out = embedding_lookup<double>(table, tokens);
  CHECK(out.values == std::vector<double>{10, 11, 10, 11, 2, 3});
  const Tensor d({3, 2}, {1, 2, 10, 20, 7, 7});
  embedding_backward<double>(table, tokens, d);
  CHECK(table.weight.grad[10] == 11);
  CHECK(table.weight.grad[11] == 22);
  CHECK(table.weight.grad[2] == 7);
  CHECK(table.weight.grad[0] == 0);
  const std::vector<std::uint8_t> bad = {16};
  CHECK_THROWS_AS(embedding_lookup<double>(table, bad), InvalidDigitError);
}

TEST_CASE("lstm matches a scalar reference cell") {
  // D = H = 1, two steps; rows of the stacked weights are i, f, g, o.
  LstmParams<double> p{Tensor({4, 1}, {0.5, -0.3, 0.8, 0.1}),
                       Tensor({4, 1}, {0.2, 0.4, -0.6, 0.9}),
                       Tensor({4}, {0.1, 0.2, -0.1, 0.05})};
  const Tensor seq({1, 2, 1}, {1.5, -0.7});
  const Tensor hs = lstm_forward(seq, p);

  double h = 0, c = 0;
  for (int t = 0; t < 2; ++t) {
    const double x = seq.values[t];
    const double i = sig(0.5 * x + 0.2 * h + 0.1);
    const double f = sig(-0.3 * x + 0.4 * h + 0.2);
    const double g = std::tanh(0.8 * x - 0.6 * h - 0.1);
    const double o = sig(0.1 * x + 0.9 * h + 0.05);
    c = f * c + i * g;
    h = o * std::tanh(c);
    CHECK(hs.values[t] == doctest::Approx(h).epsilon(1e-15));
  }
}

TEST_CASE("attention with zero query/key weights averages the values") {
  const std::size_t d = 2;
  AttentionParams<double> p{Tensor({d, d}), Tensor({d, d}),
                            Tensor({d, d}, {1, 0, 0, 1})};
  const Tensor seq({1, 3, 2}, {1, 2, 3, 4, 5, 9});
  const Tensor y = self_attention(seq, p);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(y.values[i * 2] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(y.values[i * 2 + 1] == doctest::Approx(5.0).epsilon(1e-15));
  }
}

TEST_CASE("grad_check on a quadratic") {
  const std::vector<double> theta = {0.3, -1.2, 2.5, 0.0};
  auto loss = [](std::span<const double> p, std::span<double> g) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p[i] * p[i];
      if (!g.empty()) g[i] = 2 * p[i];
    }
    return s;
  };
  const auto r = grad_check<double>(loss, theta, 1e-5);
  CHECK(r.max_rel_error < 1e-8);
  CHECK(r.coordinates == 4);
  CHECK_THROWS_AS(grad_check<double>(loss, theta, 0.0), ConfigError);
}

TEST_CASE("grad_check flags a wrong gradient") {
  const std::vector<double> theta = {1.0, 2.0};
  auto wrong = [](std::span<const double> p, std::span<double> g) {
    if (!g.empty()) {
      g[0] = 2 * p[0];
      g[1] = 3 * p[1];  // should be 2 * p[1]
    }
    return p[0] * p[0] + p[1] * p[1];
  };
  const auto r = grad_check<double>(wrong, theta, 1e-5);
  CHECK(r.worst_index == 1);
  CHECK(r.max_rel_error == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("relative error uses the 1e-8 floor") {
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1e-10, 0.0) == doctest::Approx(1e-2));
  CHECK(relative_error(2.0, 1.0) == 0.5);
}

TEST_CASE("every layer case passes in double precision") {
  for (const auto name : gradsuite::case_names()) {
    if (gradsuite::is_model_case(name)) continue;
    const auto r = gradsuite::run_case(name, 123);
    INFO(gradsuite::describe(r));
    CHECK(r.passed());
    CHECK(r.instances == 10);
  }
}

TEST_CASE("gradient suite rejects unknown cases and single model checks") {
  CHECK_THROWS_AS(gradsuite::run_case("conv", 0), ConfigError);
  CHECK_THROWS_AS(gradsuite::run_case("fc", 0, gradsuite::Precision::Single),
                  ConfigError);
}

TEST_CASE("adam: zero gradient leaves parameters in place") {
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {0.0, 0.0};
  AdamState<double> st(2, AdamHyper{});
  adam_step<double>(p, g, st);
  CHECK(p == std::vector<double>{1.0, -2.0});
  CHECK(st.step == 1);
}

TEST_CASE("adam: first step moves by lr against the gradient sign") {
  std::vector<double> p = {1.0, 1.0};
  const std::vector<double> g = {0.5, -4.0};
  AdamState<double> st(2, AdamHyper{});
  adam_step<double>(p, g, st);
  // m_hat = g, v_hat = g^2 after bias correction
  CHECK(p[0] == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 + 1e-3 * 4.0 / (4.0 + 1e-8)).epsilon(1e-15));
}

TEST_CASE("adam: second step by hand") {
  std::vector<double> p = {0.0};
  AdamState<double> st(1, AdamHyper{});
  adam_step<double>(p, std::vector<double>{1.0}, st);
  adam_step<double>(p, std::vector<double>{-1.0}, st);
  const double m = 0.9 * 0.1 - 0.1;  // -0.01
  const double v = 0.999 * 0.001 + 0.001;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  const double first = -1e-3 * 1.0 / (1.0 + 1e-8);
  const double want = first - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(p[0] == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(adam_step<double>(p, std::vector<double>{1.0, 2.0}, st),
                  ShapeError);
}

TEST_CASE("Adam skips tensors without gradients") {
  Tensor a({2}, {1, 1}), b({1}, {5});
  a.zero_grad();
  a.grad = {1, 1};
  std::vector<Tensor*> params = {&a, &b};
  Adam<double> opt(params, AdamHyper{});
  opt.step(params);
  CHECK(a.values[0] < 1.0);
  CHECK(b.values[0] == 5.0);
}

TEST_CASE("checkpoint layout is little-endian and documented") {
  const std::vector<NamedTensor> ts = {{"w", Tensor({1, 2}, {1.0, -2.5})}};
  const std::string bytes = encode_tensors(ts);
  // magic + count + name_len + name + rank + 2 dims + 2 values
  CHECK(bytes.size() == 8 + 4 + 4 + 1 + 4 + 16 + 16);
  CHECK(bytes.substr(0, 8) == "HEXNASCK");
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 1);
  CHECK(bytes[16] == 'w');
  CHECK(bytes[17] == 2);
  CHECK(bytes[21] == 1);
  CHECK(bytes[29] == 2);
  double v = 0;
  std::memcpy(&v, bytes.data() + 45, 8);
  CHECK(v == -2.5);
}

TEST_CASE("checkpoint round trip and corruption") {
  Rng rng(3);
  const std::vector<NamedTensor> ts = {
      {"a", make_linear<double>(3, 2, rng).weight},
      {"b", Tensor({4}, {0.1, 0.2, 0.3, 0.4})}};
  const std::string bytes = encode_tensors(ts);
  const auto back = decode_tensors(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "a");
  CHECK(back[0].tensor == ts[0].tensor);
  CHECK(back[1].tensor == ts[1].tensor);
  CHECK_THROWS_AS(decode_tensors(bytes.substr(0, bytes.size() - 3)), IoError);
  CHECK_THROWS_AS(decode_tensors("NOTMAGIC" + bytes.substr(8)), IoError);
  CHECK_THROWS_AS(decode_tensors(bytes + "x"), IoError);
}

TEST_CASE("initializers are seeded and bounded") {
  Rng r1(9), r2(9);
  const auto a = make_linear<double>(64, 8, r1);
  const auto b = make_linear<double>(64, 8, r2);
  CHECK(a.weight == b.weight);
  const double bound = std::sqrt(3.0 / 64.0);
  for (double w : a.weight.values) {
    CHECK(std::abs(w) <= bound);
  }
  CHECK(a.bias.values == std::vector<double>(8, 0.0));
  CHECK_THROWS_AS(make_linear<double>(0, 3, r1), ConfigError);
}
