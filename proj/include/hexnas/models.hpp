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

// The three regression architectures. All share a 16x8 digit embedding
// table over the 8-token input (a's four digits then b's) and a scalar head:
//
//   FullyConnected  flatten(64) -> Linear(64,H) -> ReLU -> slot2 -> ReLU
//                   -> Linear(H,1), slot2 = Linear(H,H) or Identity
//   Lstm            LSTM(8,H) over the 8 tokens -> last hidden -> Linear(H,1)
//   SelfAttention   attention over [8x8] -> flatten(64) -> Linear(64,H)
//                   -> ReLU -> Linear(H,1)

#ifndef HEXNAS_MODELS_HPP_
#define HEXNAS_MODELS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexnas/hexdata.hpp"
#include "hexnas/numcore/checkpoint.hpp"
#include "hexnas/numcore/layers.hpp"
#include "hexnas/random.hpp"

namespace hexnas::models {

using numcore::Tensor;

inline constexpr std::size_t kInputTokens = 2 * hexdata::kCanonicalWidth;
inline constexpr std::size_t kEmbeddingDim = numcore::kEmbeddingDim;
inline constexpr std::size_t kFlatInput = kInputTokens * kEmbeddingDim;
inline constexpr int kDefaultHidden = 64;

enum class Arch { FullyConnected, Lstm, SelfAttention };
enum class SlotKind { Linear, Identity };

// "fc", "lstm", "attn".
std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view name);
// "linear", "identity".
std::string_view to_string(SlotKind kind);
SlotKind parse_slot_kind(std::string_view name);

struct ModelSpec {
  Arch arch = Arch::FullyConnected;
  int hidden = kDefaultHidden;
  // Middle slot of the fully connected trunk; ignored by other archs.
  SlotKind slot2 = SlotKind::Linear;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(std::string_view text);

// A layer position that holds either a Linear map or a parameter-free
// pass-through.
struct Slot {
  SlotKind kind = SlotKind::Linear;
  numcore::LinearParams<double> linear;  // empty when kind == Identity
  std::size_t width = 0;
};

// Identity requires in == out; throws ConfigError otherwise.
Slot make_slot(SlotKind kind, std::size_t in, std::size_t out, Rng& rng);

class Model {
 public:
  const ModelSpec& spec() const { return spec_; }

  // One prediction per sample.
  std::vector<double> forward(std::span<const hexdata::Sample> batch) const;
  // `tokens` holds batch * 8 digit tokens.
  std::vector<double> forward_tokens(std::span<const std::uint8_t> tokens) const;

  // MSE of the batch against `targets`. Overwrites every parameter gradient
  // with d(loss)/d(param).
  double loss_and_grad(std::span<const std::uint8_t> tokens,
                       std::span<const double> targets);

  // Stable order: embedding first, then trunk, then head.
  std::vector<Tensor*> parameters();
  std::vector<numcore::NamedTensor> named_parameters() const;
  // Replaces parameter values; names and shapes must match exactly.
  void load_parameters(const std::vector<numcore::NamedTensor>& tensors);
  std::size_t parameter_count() const;

 private:
  friend Model build_fc(const ModelSpec&, std::uint64_t);
  friend Model build_lstm(const ModelSpec&, std::uint64_t);
  friend Model build_attention(const ModelSpec&, std::uint64_t);
  friend std::string export_dot(const Model&);

  struct Cache;
  std::vector<double> run(std::span<const std::uint8_t> tokens,
                          Cache* cache) const;
  // (name, tensor pointer) pairs; constness follows `self`.
  template <typename Self>
  static auto named_refs(Self& self);

  ModelSpec spec_;
  numcore::EmbeddingTable<double> embedding_;
  // FullyConnected and SelfAttention trunk.
  numcore::LinearParams<double> fc1_;
  Slot slot2_;
  numcore::LstmParams<double> lstm_;
  numcore::AttentionParams<double> attention_;
  numcore::LinearParams<double> head_;
};

Model build_fc(const ModelSpec& spec, std::uint64_t seed);
Model build_lstm(const ModelSpec& spec, std::uint64_t seed);
Model build_attention(const ModelSpec& spec, std::uint64_t seed);
// Dispatches on spec.arch. Throws ConfigError for hidden < 1.
Model build_model(const ModelSpec& spec, std::uint64_t seed);

// Closed-form parameter counts, used to cross-check construction.
std::size_t expected_parameter_count(const ModelSpec& spec);

// Graphviz digraph: embedding, one node per pipeline stage, output.
std::string export_dot(const Model& model);

// Writes `<prefix>.ckpt` (binary tensors) and `<prefix>.spec.json`.
void save_model(const Model& model, const std::filesystem::path& prefix);
Model load_model(const std::filesystem::path& prefix);

}  // namespace hexnas::models

#endif  // HEXNAS_MODELS_HPP_
