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

// Binary tensor checkpoints.
//
// Layout, all integers and floats little-endian:
//
//   magic        8 bytes  "HEXNASCK"
//   count        u32      number of tensors
//   per tensor:
//     name_len   u32
//     name       name_len bytes, UTF-8
//     rank       u32
//     dims       rank x u64
//     values     product(dims) x IEEE-754 binary64

#ifndef HEXNAS_NUMCORE_CHECKPOINT_HPP_
#define HEXNAS_NUMCORE_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hexnas/numcore/tensor.hpp"

namespace hexnas::numcore {

struct NamedTensor {
  std::string name;
  Tensor tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::string encode_tensors(const std::vector<NamedTensor>& tensors);
// Throws IoError on truncated or malformed input.
std::vector<NamedTensor> decode_tensors(std::string_view bytes);

void save_tensors(const std::filesystem::path& path,
                  const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_tensors(const std::filesystem::path& path);

}  // namespace hexnas::numcore

#endif  // HEXNAS_NUMCORE_CHECKPOINT_HPP_
