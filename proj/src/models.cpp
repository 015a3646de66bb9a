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

#include "hexnas/models.hpp"

#include <json.hpp>
#include <sstream>

#include "hexnas/errors.hpp"
#include "hexnas/numcore/init.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::models {

using numcore::BasicTensor;
using numcore::Shape;

namespace {

constexpr std::uint64_t kEmbeddingStream = 1;
constexpr std::uint64_t kTrunkStream = 2;
constexpr std::uint64_t kHeadStream = 3;

void check_hidden(const ModelSpec& spec) {
  if (spec.hidden < 1) {
    throw ConfigError("hidden width must be positive, got " +
                      std::to_string(spec.hidden));
  }
}

void check_arch(const ModelSpec& spec, Arch expected) {
  if (spec.arch != expected) {
    throw ConfigError("model spec is '" + std::string(to_string(spec.arch)) +
                      "', builder expects '" +
                      std::string(to_string(expected)) + "'");
  }
}

numcore::EmbeddingTable<double> seeded_embedding(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kEmbeddingStream));
  return numcore::make_embedding<double>(rng);
}

numcore::LinearParams<double> seeded_head(std::size_t in, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kHeadStream));
  return numcore::make_linear<double>(in, 1, rng);
}

std::size_t linear_count(std::size_t in, std::size_t out) {
  return in * out + out;
}

}  // namespace

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::FullyConnected:
      return "fc";
    case Arch::Lstm:
      return "lstm";
    case Arch::SelfAttention:
      return "attn";
  }
  return "?";
}

Arch parse_arch(std::string_view name) {
  for (const Arch a : {Arch::FullyConnected, Arch::Lstm, Arch::SelfAttention}) {
    if (name == to_string(a)) {
      return a;
    }
  }
  throw ConfigError("unknown architecture '" + std::string(name) +
                    "' (expected fc, lstm or attn)");
}

std::string_view to_string(SlotKind kind) {
  return kind == SlotKind::Linear ? "linear" : "identity";
}

SlotKind parse_slot_kind(std::string_view name) {
  if (name == "linear") {
    return SlotKind::Linear;
  }
  if (name == "identity") {
    return SlotKind::Identity;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) +
                    "' (expected linear or identity)");
}

std::string spec_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["arch"] = to_string(spec.arch);
  j["hidden"] = spec.hidden;
  j["slot2"] = to_string(spec.slot2);
  return j.dump(2) + "\n";
}

ModelSpec spec_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelSpec spec;
    spec.arch = parse_arch(j.at("arch").get<std::string>());
    spec.hidden = j.at("hidden").get<int>();
    spec.slot2 = parse_slot_kind(j.value("slot2", std::string("linear")));
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model spec: ") + e.what());
  }
}

Slot make_slot(SlotKind kind, std::size_t in, std::size_t out, Rng& rng) {
  Slot s;
  s.kind = kind;
  s.width = out;
  if (kind == SlotKind::Identity) {
    if (in != out) {
      throw ConfigError("identity slot needs equal dimensions, got " +
                        std::to_string(in) + " -> " + std::to_string(out));
    }
    return s;
  }
  s.linear = numcore::make_linear<double>(in, out, rng);
  return s;
}

// ------------------------------------------------------------- builders --

Model build_fc(const ModelSpec& spec, std::uint64_t seed) {
  check_arch(spec, Arch::FullyConnected);
  check_hidden(spec);
  const auto h = static_cast<std::size_t>(spec.hidden);
  Model m;
  m.spec_ = spec;
  m.embedding_ = seeded_embedding(seed);
  Rng rng(derive_seed(seed, kTrunkStream));
  m.fc1_ = numcore::make_linear<double>(kFlatInput, h, rng);
  m.slot2_ = make_slot(spec.slot2, h, h, rng);
  m.head_ = seeded_head(h, seed);
  return m;
}

Model build_lstm(const ModelSpec& spec, std::uint64_t seed) {
  check_arch(spec, Arch::Lstm);
  check_hidden(spec);
  const auto h = static_cast<std::size_t>(spec.hidden);
  Model m;
  m.spec_ = spec;
  m.embedding_ = seeded_embedding(seed);
  Rng rng(derive_seed(seed, kTrunkStream));
  m.lstm_ = numcore::make_lstm<double>(kEmbeddingDim, h, rng);
  m.head_ = seeded_head(h, seed);
  return m;
}

Model build_attention(const ModelSpec& spec, std::uint64_t seed) {
  check_arch(spec, Arch::SelfAttention);
  check_hidden(spec);
  const auto h = static_cast<std::size_t>(spec.hidden);
  Model m;
  m.spec_ = spec;
  m.embedding_ = seeded_embedding(seed);
  Rng rng(derive_seed(seed, kTrunkStream));
  m.attention_ = numcore::make_attention<double>(kEmbeddingDim, rng);
  m.fc1_ = numcore::make_linear<double>(kFlatInput, h, rng);
  m.head_ = seeded_head(h, seed);
  return m;
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.arch) {
    case Arch::FullyConnected:
      return build_fc(spec, seed);
    case Arch::Lstm:
      return build_lstm(spec, seed);
    case Arch::SelfAttention:
      return build_attention(spec, seed);
  }
  throw ConfigError("unknown architecture");
}

std::size_t expected_parameter_count(const ModelSpec& spec) {
  const auto h = static_cast<std::size_t>(spec.hidden);
  const std::size_t emb = numcore::kEmbeddingRows * kEmbeddingDim;
  const std::size_t head = linear_count(h, 1);
  switch (spec.arch) {
    case Arch::FullyConnected:
      return emb + linear_count(kFlatInput, h) +
             (spec.slot2 == SlotKind::Linear ? linear_count(h, h) : 0) + head;
    case Arch::Lstm:
      return emb + 4 * (h * kEmbeddingDim + h * h + h) + head;
    case Arch::SelfAttention:
      return emb + 3 * kEmbeddingDim * kEmbeddingDim +
             linear_count(kFlatInput, h) + head;
  }
  return 0;
}

// ------------------------------------------------------ forward/backward --

struct Model::Cache {
  Tensor embedded;  // [B*8 x 8]
  Tensor trunk_in;  // [B x 64] input of fc1
  Tensor h1, a1, h2, a2;
  numcore::LstmCache<double> lstm;
  Tensor lstm_in;  // [B x 8 x 8]
  numcore::AttentionCache<double> attention;
  Tensor head_in;  // [B x H]
};

std::vector<double> Model::run(std::span<const std::uint8_t> tokens,
                               Cache* cache) const {
  if (tokens.empty() || tokens.size() % kInputTokens != 0) {
    throw ShapeError("model input needs a positive multiple of " +
                     std::to_string(kInputTokens) + " tokens, got " +
                     std::to_string(tokens.size()));
  }
  const std::size_t batch = tokens.size() / kInputTokens;
  Tensor embedded = numcore::embedding_lookup(embedding_, tokens);
  Tensor head_in;

  switch (spec_.arch) {
    case Arch::FullyConnected: {
      Tensor x(Shape{batch, kFlatInput}, embedded.values);
      Tensor h1 = numcore::linear_forward(x, fc1_);
      Tensor a1 = numcore::relu_forward(h1);
      Tensor h2 = slot2_.kind == SlotKind::Linear
                      ? numcore::linear_forward(a1, slot2_.linear)
                      : a1;
      head_in = numcore::relu_forward(h2);
      if (cache != nullptr) {
        cache->trunk_in = std::move(x);
        cache->h1 = std::move(h1);
        cache->a1 = std::move(a1);
        cache->h2 = std::move(h2);
      }
      break;
    }
    case Arch::Lstm: {
      Tensor seq(Shape{batch, kInputTokens, kEmbeddingDim}, embedded.values);
      numcore::LstmCache<double> lc;
      Tensor hs = numcore::lstm_forward(seq, lstm_, cache ? &lc : nullptr);
      const std::size_t h = lstm_.hidden();
      head_in = Tensor(Shape{batch, h});
      for (std::size_t b = 0; b < batch; ++b) {
        const auto* last = hs.values.data() + (b * kInputTokens + kInputTokens - 1) * h;
        std::copy_n(last, h, head_in.values.data() + b * h);
      }
      if (cache != nullptr) {
        cache->lstm = std::move(lc);
        cache->lstm_in = std::move(seq);
      }
      break;
    }
    case Arch::SelfAttention: {
      Tensor seq(Shape{batch, kInputTokens, kEmbeddingDim}, embedded.values);
      numcore::AttentionCache<double> ac;
      Tensor att = numcore::self_attention(seq, attention_, cache ? &ac : nullptr);
      Tensor x(Shape{batch, kFlatInput}, std::move(att.values));
      Tensor h1 = numcore::linear_forward(x, fc1_);
      head_in = numcore::relu_forward(h1);
      if (cache != nullptr) {
        cache->attention = std::move(ac);
        cache->lstm_in = std::move(seq);
        cache->trunk_in = std::move(x);
        cache->h1 = std::move(h1);
      }
      break;
    }
  }

  Tensor out = numcore::linear_forward(head_in, head_);
  if (cache != nullptr) {
    cache->embedded = std::move(embedded);
    cache->head_in = std::move(head_in);
  }
  return std::move(out.values);
}

std::vector<double> Model::forward_tokens(
    std::span<const std::uint8_t> tokens) const {
  return run(tokens, nullptr);
}

std::vector<double> Model::forward(
    std::span<const hexdata::Sample> batch) const {
  std::vector<std::uint8_t> tokens;
  tokens.reserve(batch.size() * kInputTokens);
  for (const auto& s : batch) {
    const auto t = hexdata::tokens_of(s);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  return run(tokens, nullptr);
}

double Model::loss_and_grad(std::span<const std::uint8_t> tokens,
                            std::span<const double> targets) {
  Cache cache;
  const std::vector<double> pred = run(tokens, &cache);
  const double loss = numcore::mse<double>(pred, targets);
  const std::size_t batch = pred.size();

  for (Tensor* p : parameters()) {
    p->zero_grad();
  }
  Tensor dout(Shape{batch, 1}, numcore::mse_backward<double>(pred, targets));
  Tensor dhead_in = numcore::linear_backward(cache.head_in, head_, dout);

  Tensor dembedded;
  switch (spec_.arch) {
    case Arch::FullyConnected: {
      Tensor dh2 = numcore::relu_backward(cache.h2, dhead_in);
      Tensor da1 = slot2_.kind == SlotKind::Linear
                       ? numcore::linear_backward(cache.a1, slot2_.linear, dh2)
                       : std::move(dh2);
      Tensor dh1 = numcore::relu_backward(cache.h1, da1);
      Tensor dx = numcore::linear_backward(cache.trunk_in, fc1_, dh1);
      dembedded = Tensor(cache.embedded.shape, std::move(dx.values));
      break;
    }
    case Arch::Lstm: {
      const std::size_t h = lstm_.hidden();
      Tensor dh(Shape{batch, kInputTokens, h});
      for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(dhead_in.values.data() + b * h, h,
                    dh.values.data() + (b * kInputTokens + kInputTokens - 1) * h);
      }
      Tensor dx = numcore::lstm_backward(cache.lstm_in, lstm_, cache.lstm, dh);
      dembedded = Tensor(cache.embedded.shape, std::move(dx.values));
      break;
    }
    case Arch::SelfAttention: {
      Tensor dh1 = numcore::relu_backward(cache.h1, dhead_in);
      Tensor dflat = numcore::linear_backward(cache.trunk_in, fc1_, dh1);
      Tensor datt(Shape{batch, kInputTokens, kEmbeddingDim},
                  std::move(dflat.values));
      Tensor dx = numcore::self_attention_backward(cache.lstm_in, attention_,
                                                   cache.attention, datt);
      dembedded = Tensor(cache.embedded.shape, std::move(dx.values));
      break;
    }
  }
  numcore::embedding_backward(embedding_, tokens, dembedded);
  return loss;
}

// ----------------------------------------------------------- parameters --

template <typename Self>
auto Model::named_refs(Self& self) {
  using Ptr = decltype(&self.head_.weight);
  std::vector<std::pair<std::string, Ptr>> out;
  out.emplace_back("embedding.weight", &self.embedding_.weight);
  switch (self.spec_.arch) {
    case Arch::FullyConnected:
      out.emplace_back("fc1.weight", &self.fc1_.weight);
      out.emplace_back("fc1.bias", &self.fc1_.bias);
      if (self.slot2_.kind == SlotKind::Linear) {
        out.emplace_back("slot2.weight", &self.slot2_.linear.weight);
        out.emplace_back("slot2.bias", &self.slot2_.linear.bias);
      }
      break;
    case Arch::Lstm:
      out.emplace_back("lstm.w_input", &self.lstm_.w_input);
      out.emplace_back("lstm.w_recurrent", &self.lstm_.w_recurrent);
      out.emplace_back("lstm.bias", &self.lstm_.bias);
      break;
    case Arch::SelfAttention:
      out.emplace_back("attn.w_query", &self.attention_.w_query);
      out.emplace_back("attn.w_key", &self.attention_.w_key);
      out.emplace_back("attn.w_value", &self.attention_.w_value);
      out.emplace_back("fc1.weight", &self.fc1_.weight);
      out.emplace_back("fc1.bias", &self.fc1_.bias);
      break;
  }
  out.emplace_back("head.weight", &self.head_.weight);
  out.emplace_back("head.bias", &self.head_.bias);
  return out;
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_refs(*this)) {
    out.push_back(t);
  }
  return out;
}

std::vector<numcore::NamedTensor> Model::named_parameters() const {
  std::vector<numcore::NamedTensor> out;
  for (const auto& [name, t] : named_refs(*this)) {
    out.push_back({name, Tensor(t->shape, t->values)});
  }
  return out;
}

void Model::load_parameters(const std::vector<numcore::NamedTensor>& tensors) {
  auto refs = named_refs(*this);
  if (refs.size() != tensors.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(tensors.size()) +
                     " tensors, model '" + std::string(to_string(spec_.arch)) +
                     "' expects " + std::to_string(refs.size()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& [name, dst] = refs[i];
    const auto& src = tensors[i];
    if (src.name != name || src.tensor.shape != dst->shape) {
      throw ShapeError("checkpoint tensor '" + src.name + "' " +
                       numcore::shape_string(src.tensor.shape) +
                       " does not match model tensor '" + name + "' " +
                       numcore::shape_string(dst->shape));
    }
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    refs[i].second->values = tensors[i].tensor.values;
    refs[i].second->grad.clear();
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& nt : named_parameters()) {
    n += nt.tensor.size();
  }
  return n;
}

// ------------------------------------------------------------------ dot --

std::string export_dot(const Model& model) {
  struct Node {
    std::string id;
    std::string label;
    std::string shape;
  };
  const auto& spec = model.spec();
  const std::string h = std::to_string(spec.hidden);
  std::vector<Node> nodes;
  nodes.push_back({"embedding", "Embedding 16x8 (8 tokens)", "box"});
  switch (spec.arch) {
    case Arch::FullyConnected:
      nodes.push_back({"fc1", "Linear 64->" + h, "box"});
      nodes.push_back({"relu1", "ReLU", "ellipse"});
      if (spec.slot2 == SlotKind::Linear) {
        nodes.push_back({"slot2", "Linear " + h + "->" + h, "box"});
      } else {
        nodes.push_back({"slot2", "Identity " + h, "box, style=dashed"});
      }
      nodes.push_back({"relu2", "ReLU", "ellipse"});
      nodes.push_back({"head", "Linear " + h + "->1", "box"});
      break;
    case Arch::Lstm:
      nodes.push_back({"lstm", "LSTM 8->" + h, "box"});
      nodes.push_back({"last", "LastHidden", "ellipse"});
      nodes.push_back({"head", "Linear " + h + "->1", "box"});
      break;
    case Arch::SelfAttention:
      nodes.push_back({"attn", "SelfAttention 8x8", "box"});
      nodes.push_back({"flatten", "Flatten 64", "ellipse"});
      nodes.push_back({"fc1", "Linear 64->" + h, "box"});
      nodes.push_back({"relu1", "ReLU", "ellipse"});
      nodes.push_back({"head", "Linear " + h + "->1", "box"});
      break;
  }
  nodes.push_back({"output", "Output [batch x 1]", "plaintext"});

  std::ostringstream out;
  out << "digraph " << to_string(spec.arch) << " {\n";
  out << "  rankdir=TB;\n";
  for (const auto& n : nodes) {
    out << "  " << n.id << " [label=\"" << n.label << "\", shape=" << n.shape
        << "];\n";
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    out << "  " << nodes[i].id << " -> " << nodes[i + 1].id << ";\n";
  }
  out << "}\n";
  return out.str();
}

// ------------------------------------------------------------------- io --

void save_model(const Model& model, const std::filesystem::path& prefix) {
  auto ckpt = prefix;
  ckpt += ".ckpt";
  auto spec = prefix;
  spec += ".spec.json";
  numcore::save_tensors(ckpt, model.named_parameters());
  write_file_atomic(spec, spec_to_json(model.spec()));
}

Model load_model(const std::filesystem::path& prefix) {
  auto ckpt = prefix;
  ckpt += ".ckpt";
  auto spec_path = prefix;
  spec_path += ".spec.json";
  const ModelSpec spec = spec_from_json(read_file(spec_path));
  Model m = build_model(spec, 0);
  m.load_parameters(numcore::load_tensors(ckpt));
  return m;
}

}  // namespace hexnas::models
