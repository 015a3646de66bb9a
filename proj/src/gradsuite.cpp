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

#include "hexnas/gradsuite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "hexnas/errors.hpp"
#include "hexnas/models.hpp"
#include "hexnas/numcore/init.hpp"
#include "hexnas/numcore/layers.hpp"
#include "hexnas/random.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::gradsuite {
namespace {

using numcore::BasicTensor;
using numcore::Shape;

constexpr std::array<std::string_view, 10> kNames = {
    "linear", "relu",       "softmax", "embedding",  "lstm",
    "attention", "mse",     "fc",      "lstm-model", "attn-model"};

// Keeps relu inputs this far from the kink.
constexpr double kKinkMargin = 0.05;

enum class Kind {
  Linear, Relu, Softmax, Embedding, Lstm, Attention, Mse
};

// A layer instance: the flat starting point, the block shapes it is cut
// into, the projection weights and (for embedding) the tokens.
struct Setup {
  Kind kind;
  std::vector<Shape> blocks;
  std::vector<double> point;
  std::vector<double> projection;
  std::vector<std::uint8_t> tokens;
};

void append(std::vector<double>& out, const std::vector<double>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

template <typename T>
std::vector<double> widen(const BasicTensor<T>& t) {
  return {t.values.begin(), t.values.end()};
}

std::vector<double> random_values(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) {
    x = rng.uniform(-scale, scale);
  }
  return v;
}

template <typename T>
class Cursor {
 public:
  Cursor(const Setup& s, std::span<const T> point)
      : setup_(s), point_(point) {}

  BasicTensor<T> next() {
    const Shape& shape = setup_.blocks.at(block_++);
    const std::size_t n = numcore::shape_size(shape);
    BasicTensor<T> t(shape, std::vector<T>(point_.begin() + offset_,
                                           point_.begin() + offset_ + n));
    offset_ += n;
    return t;
  }

 private:
  const Setup& setup_;
  std::span<const T> point_;
  std::size_t block_ = 0;
  std::size_t offset_ = 0;
};

template <typename T>
class GradWriter {
 public:
  explicit GradWriter(std::span<T> out) : out_(out) {}
  bool active() const { return !out_.empty(); }
  void put(const std::vector<T>& g) {
    std::copy(g.begin(), g.end(), out_.begin() + offset_);
    offset_ += g.size();
  }

 private:
  std::span<T> out_;
  std::size_t offset_ = 0;
};

template <typename T>
T project(const BasicTensor<T>& out, const std::vector<double>& r) {
  T sum{0};
  for (std::size_t i = 0; i < out.size(); ++i) {
    sum += static_cast<T>(r[i]) * out.values[i];
  }
  return sum;
}

template <typename T>
BasicTensor<T> projection_grad(const Shape& shape, const std::vector<double>& r) {
  BasicTensor<T> d(shape);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d.values[i] = static_cast<T>(r[i]);
  }
  return d;
}

template <typename T>
T evaluate(const Setup& s, std::span<const T> point, std::span<T> grad) {
  Cursor<T> in(s, point);
  GradWriter<T> out(grad);
  switch (s.kind) {
    case Kind::Linear:
    case Kind::Relu: {
      BasicTensor<T> x = in.next();
      numcore::LinearParams<T> p{in.next(), in.next()};
      BasicTensor<T> z = numcore::linear_forward(x, p);
      const bool relu = s.kind == Kind::Relu;
      BasicTensor<T> y = relu ? numcore::relu_forward(z) : z;
      const T loss = project(y, s.projection);
      if (out.active()) {
        BasicTensor<T> dy = projection_grad<T>(y.shape, s.projection);
        if (relu) {
          dy = numcore::relu_backward(z, dy);
        }
        BasicTensor<T> dx = numcore::linear_backward(x, p, dy);
        out.put(dx.values);
        out.put(p.weight.grad);
        out.put(p.bias.grad);
      }
      return loss;
    }
    case Kind::Softmax: {
      BasicTensor<T> x = in.next();
      BasicTensor<T> y = numcore::softmax_rows(x);
      const T loss = project(y, s.projection);
      if (out.active()) {
        out.put(numcore::softmax_rows_backward(
                    y, projection_grad<T>(y.shape, s.projection))
                    .values);
      }
      return loss;
    }
    case Kind::Embedding: {
      numcore::EmbeddingTable<T> table{in.next()};
      BasicTensor<T> y = numcore::embedding_lookup<T>(table, s.tokens);
      const T loss = project(y, s.projection);
      if (out.active()) {
        numcore::embedding_backward<T>(
            table, s.tokens, projection_grad<T>(y.shape, s.projection));
        out.put(table.weight.grad);
      }
      return loss;
    }
    case Kind::Lstm: {
      BasicTensor<T> seq = in.next();
      numcore::LstmParams<T> p{in.next(), in.next(), in.next()};
      numcore::LstmCache<T> cache;
      BasicTensor<T> h = numcore::lstm_forward(seq, p, &cache);
      const T loss = project(h, s.projection);
      if (out.active()) {
        BasicTensor<T> dx = numcore::lstm_backward(
            seq, p, cache, projection_grad<T>(h.shape, s.projection));
        out.put(dx.values);
        out.put(p.w_input.grad);
        out.put(p.w_recurrent.grad);
        out.put(p.bias.grad);
      }
      return loss;
    }
    case Kind::Attention: {
      BasicTensor<T> seq = in.next();
      numcore::AttentionParams<T> p{in.next(), in.next(), in.next()};
      numcore::AttentionCache<T> cache;
      BasicTensor<T> y = numcore::self_attention(seq, p, &cache);
      const T loss = project(y, s.projection);
      if (out.active()) {
        BasicTensor<T> dx = numcore::self_attention_backward(
            seq, p, cache, projection_grad<T>(y.shape, s.projection));
        out.put(dx.values);
        out.put(p.w_query.grad);
        out.put(p.w_key.grad);
        out.put(p.w_value.grad);
      }
      return loss;
    }
    case Kind::Mse: {
      BasicTensor<T> pred = in.next();
      BasicTensor<T> target = in.next();
      const T loss = numcore::mse<T>(pred.values, target.values);
      if (out.active()) {
        std::vector<T> d = numcore::mse_backward<T>(pred.values, target.values);
        out.put(d);
        for (T& v : d) {
          v = -v;
        }
        out.put(d);
      }
      return loss;
    }
  }
  throw ConfigError("unhandled gradient case");
}

Setup make_setup(Kind kind, Rng& rng) {
  Setup s{kind, {}, {}, {}, {}};
  switch (kind) {
    case Kind::Linear: {
      const std::size_t batch = 3, in = 5, out = 4;
      s.blocks = {{batch, in}, {out, in}, {out}};
      append(s.point, random_values(batch * in, rng));
      auto p = numcore::make_linear<double>(in, out, rng);
      append(s.point, p.weight.values);
      append(s.point, random_values(out, rng, 0.5));
      s.projection = random_values(batch * out, rng);
      break;
    }
    case Kind::Relu: {
      const std::size_t batch = 4, in = 5, out = 6;
      s.blocks = {{batch, in}, {out, in}, {out}};
      // Redraw until every pre-activation clears the kink.
      for (;;) {
        s.point = random_values(batch * in, rng);
        auto p = numcore::make_linear<double>(in, out, rng);
        append(s.point, p.weight.values);
        append(s.point, random_values(out, rng, 0.5));
        Cursor<double> c(s, s.point);
        BasicTensor<double> x = c.next();
        numcore::LinearParams<double> lp{c.next(), c.next()};
        const auto z = numcore::linear_forward(x, lp);
        if (std::all_of(z.values.begin(), z.values.end(), [](double v) {
              return std::abs(v) > kKinkMargin;
            })) {
          break;
        }
      }
      s.projection = random_values(batch * out, rng);
      break;
    }
    case Kind::Softmax: {
      const std::size_t rows = 3, cols = 5;
      s.blocks = {{rows, cols}};
      s.point = random_values(rows * cols, rng, 2.0);
      s.projection = random_values(rows * cols, rng);
      break;
    }
    case Kind::Embedding: {
      const std::size_t len = 8;
      const auto table = numcore::make_embedding<double>(rng);
      s.blocks = {table.weight.shape};
      s.point = widen(table.weight);
      for (std::size_t i = 0; i < len; ++i) {
        s.tokens.push_back(static_cast<std::uint8_t>(rng.below(16)));
      }
      s.tokens[len - 1] = s.tokens[0];  // at least one repeat
      s.projection = random_values(len * table.weight.dim(1), rng);
      break;
    }
    case Kind::Lstm: {
      const std::size_t batch = 2, steps = 3, dim = 4, hidden = 4;
      s.blocks = {{batch, steps, dim},
                  {4 * hidden, dim},
                  {4 * hidden, hidden},
                  {4 * hidden}};
      append(s.point, random_values(batch * steps * dim, rng));
      auto p = numcore::make_lstm<double>(dim, hidden, rng);
      append(s.point, p.w_input.values);
      append(s.point, p.w_recurrent.values);
      append(s.point, random_values(4 * hidden, rng, 0.5));
      s.projection = random_values(batch * steps * hidden, rng);
      break;
    }
    case Kind::Attention: {
      const std::size_t batch = 2, steps = 4, dim = numcore::kEmbeddingDim;
      s.blocks = {{batch, steps, dim}, {dim, dim}, {dim, dim}, {dim, dim}};
      append(s.point, random_values(batch * steps * dim, rng));
      auto p = numcore::make_attention<double>(dim, rng);
      append(s.point, p.w_query.values);
      append(s.point, p.w_key.values);
      append(s.point, p.w_value.values);
      s.projection = random_values(batch * steps * dim, rng);
      break;
    }
    case Kind::Mse: {
      const std::size_t n = 7;
      s.blocks = {{n}, {n}};
      append(s.point, random_values(n, rng));
      append(s.point, random_values(n, rng));
      break;
    }
  }
  return s;
}

Kind layer_kind(std::string_view name) {
  static constexpr std::array<Kind, 7> kinds = {
      Kind::Linear, Kind::Relu, Kind::Softmax, Kind::Embedding,
      Kind::Lstm,   Kind::Attention, Kind::Mse};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kNames[i] == name) {
      return kinds[i];
    }
  }
  throw ConfigError("unknown gradient case '" + std::string(name) + "'");
}

using Wide = long double;

template <typename T>
std::vector<Wide> to_wide(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

numcore::GradCheckResult check_layer(Kind kind, std::uint64_t seed,
                                     Precision precision, std::size_t& coords) {
  Rng rng(seed);
  const Setup s = make_setup(kind, rng);
  coords = s.point.size();
  auto reference = [&s](std::span<const Wide> p, std::span<Wide> g) {
    return evaluate<Wide>(s, p, g);
  };
  std::vector<double> analytic;
  std::vector<Wide> at;
  if (precision == Precision::Double) {
    analytic.resize(s.point.size());
    evaluate<double>(s, s.point, analytic);
    at = to_wide(s.point);
  } else {
    const std::vector<float> point32(s.point.begin(), s.point.end());
    std::vector<float> grad32(point32.size());
    evaluate<float>(s, point32, grad32);
    analytic.assign(grad32.begin(), grad32.end());
    at = to_wide(point32);
  }
  const auto numeric =
      numcore::numeric_gradient<Wide>(reference, at, Wide{kStep});
  return numcore::compare_gradients(analytic, numeric);
}

// Independent forward pass of a model, rebuilt from numcore layers at scalar
// type T and fed the model's parameters as one flat vector.
template <typename T>
T reference_loss(const models::ModelSpec& spec,
                 const std::vector<numcore::NamedTensor>& layout,
                 std::span<const T> point,
                 const std::vector<std::uint8_t>& tokens,
                 const std::vector<double>& targets) {
  std::vector<std::pair<std::string, BasicTensor<T>>> named;
  std::size_t offset = 0;
  for (const auto& nt : layout) {
    const std::size_t n = nt.tensor.size();
    named.emplace_back(nt.name,
                       BasicTensor<T>(nt.tensor.shape,
                                      std::vector<T>(point.begin() + offset,
                                                     point.begin() + offset + n)));
    offset += n;
  }
  auto get = [&named](std::string_view name) -> const BasicTensor<T>& {
    for (const auto& [n, t] : named) {
      if (n == name) {
        return t;
      }
    }
    throw ShapeError("reference model: missing tensor '" + std::string(name) + "'");
  };

  const std::size_t batch = tokens.size() / models::kInputTokens;
  const numcore::EmbeddingTable<T> table{get("embedding.weight")};
  const BasicTensor<T> embedded = numcore::embedding_lookup<T>(table, tokens);
  BasicTensor<T> head_in;
  switch (spec.arch) {
    case models::Arch::FullyConnected: {
      const BasicTensor<T> x({batch, models::kFlatInput}, embedded.values);
      BasicTensor<T> a =
          numcore::relu_forward(numcore::linear_forward(
              x, numcore::LinearParams<T>{get("fc1.weight"), get("fc1.bias")}));
      if (spec.slot2 == models::SlotKind::Linear) {
        a = numcore::linear_forward(
            a, numcore::LinearParams<T>{get("slot2.weight"), get("slot2.bias")});
      }
      head_in = numcore::relu_forward(a);
      break;
    }
    case models::Arch::Lstm: {
      const BasicTensor<T> seq(
          {batch, models::kInputTokens, models::kEmbeddingDim},
          embedded.values);
      const numcore::LstmParams<T> p{get("lstm.w_input"),
                                     get("lstm.w_recurrent"), get("lstm.bias")};
      const BasicTensor<T> hs = numcore::lstm_forward(seq, p);
      const std::size_t h = p.hidden();
      head_in = BasicTensor<T>({batch, h});
      for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(hs.values.begin() + static_cast<std::ptrdiff_t>(
                                            ((b + 1) * models::kInputTokens - 1) * h),
                    h, head_in.values.begin() + static_cast<std::ptrdiff_t>(b * h));
      }
      break;
    }
    case models::Arch::SelfAttention: {
      const BasicTensor<T> seq(
          {batch, models::kInputTokens, models::kEmbeddingDim},
          embedded.values);
      const numcore::AttentionParams<T> p{
          get("attn.w_query"), get("attn.w_key"), get("attn.w_value")};
      const BasicTensor<T> att = numcore::self_attention(seq, p);
      const BasicTensor<T> x({batch, models::kFlatInput}, att.values);
      head_in = numcore::relu_forward(numcore::linear_forward(
          x, numcore::LinearParams<T>{get("fc1.weight"), get("fc1.bias")}));
      break;
    }
  }
  const BasicTensor<T> out = numcore::linear_forward(
      head_in, numcore::LinearParams<T>{get("head.weight"), get("head.bias")});
  const std::vector<T> t(targets.begin(), targets.end());
  return numcore::mse<T>(out.values, t);
}

// The reference forward must reproduce the model's loss before it may serve
// as the difference oracle.
constexpr double kForwardAgreement = 1e-12;

numcore::GradCheckResult check_model(std::string_view name, int instance,
                                     std::uint64_t seed, std::size_t& coords) {
  models::ModelSpec spec;
  spec.hidden = 5;
  if (name == "fc") {
    spec.arch = models::Arch::FullyConnected;
    spec.slot2 = instance % 2 == 0 ? models::SlotKind::Linear
                                   : models::SlotKind::Identity;
  } else if (name == "lstm-model") {
    spec.arch = models::Arch::Lstm;
  } else {
    spec.arch = models::Arch::SelfAttention;
  }
  models::Model model = models::build_model(spec, seed);
  Rng rng(derive_seed(seed, 0x4441));
  const std::size_t batch = 3;
  std::vector<std::uint8_t> tokens(batch * models::kInputTokens);
  for (auto& t : tokens) {
    t = static_cast<std::uint8_t>(rng.below(16));
  }
  const std::vector<double> targets = random_values(batch, rng);

  const auto layout = model.named_parameters();
  const auto params = model.parameters();
  const std::vector<double> point = numcore::flatten_values<double>(params);
  coords = point.size();

  const double loss = model.loss_and_grad(tokens, targets);
  const std::vector<double> analytic = numcore::flatten_grads<double>(params);
  const double replay =
      reference_loss<double>(spec, layout, point, tokens, targets);
  if (numcore::relative_error(loss, replay) > kForwardAgreement) {
    throw NumericError("reference forward disagrees with model '" +
                       std::string(name) + "': " + format_real(loss) + " vs " +
                       format_real(replay));
  }

  auto reference = [&](std::span<const Wide> p, std::span<Wide>) {
    return reference_loss<Wide>(spec, layout, p, tokens, targets);
  };
  const auto numeric = numcore::numeric_gradient<Wide>(
      reference, to_wide(point), Wide{kStep});
  return numcore::compare_gradients(analytic, numeric);
}

}  // namespace

std::string_view to_string(Precision p) {
  return p == Precision::Double ? "double" : "single";
}

Precision parse_precision(std::string_view name) {
  if (name == "double") {
    return Precision::Double;
  }
  if (name == "single") {
    return Precision::Single;
  }
  throw ConfigError("unknown precision '" + std::string(name) +
                    "' (expected double or single)");
}

double tolerance(Precision p) {
  return p == Precision::Double ? kDoubleTolerance : kSingleTolerance;
}

std::span<const std::string_view> case_names() { return kNames; }

bool is_model_case(std::string_view name) {
  return name == "fc" || name == "lstm-model" || name == "attn-model";
}

CaseReport run_case(std::string_view name, std::uint64_t seed,
                    Precision precision, int instances) {
  if (instances < 1) {
    throw ConfigError("gradient check needs at least one instance");
  }
  const bool model = is_model_case(name);
  if (model && precision == Precision::Single) {
    throw ConfigError("model gradient checks run in double precision only");
  }
  const Kind kind = model ? Kind::Linear : layer_kind(name);

  CaseReport report;
  report.name = std::string(name);
  report.precision = precision;
  report.instances = instances;
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    std::size_t coords = 0;
    const auto r = model ? check_model(name, k, s, coords)
                         : check_layer(kind, s, precision, coords);
    report.coordinates += coords;
    if (k == 0 || r.max_rel_error > report.worst.max_rel_error) {
      report.worst = r;
      report.worst_instance = k;
    }
  }
  return report;
}

std::string describe(const CaseReport& r) {
  return r.name + ' ' + std::string(to_string(r.precision)) +
         " n=" + std::to_string(r.instances) +
         " max_rel_error=" + format_real(r.worst.max_rel_error) +
         " at instance " + std::to_string(r.worst_instance) + " coordinate " +
         std::to_string(r.worst.worst_index) +
         " (analytic " + format_real(r.worst.analytic) + ", numeric " +
         format_real(r.worst.numeric) + ") tolerance " +
         format_real(tolerance(r.precision)) +
         (r.passed() ? " ok" : " FAIL");
}

}  // namespace hexnas::gradsuite
