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

#include "hexnas/numcore/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "hexnas/errors.hpp"
#include "hexnas/textio.hpp"

namespace hexnas::numcore {
namespace {

constexpr std::string_view kMagic = "HEXNASCK";

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IoError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const std::vector<NamedTensor>& tensors) {
  std::string out(kMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (const std::size_t d : t.shape) {
      put_le<std::uint64_t>(out, d);
    }
    for (const double v : t.values) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) {
    throw IoError("not a hexnas checkpoint (bad magic)");
  }
  const auto count = in.get_le<std::uint32_t>();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = std::string(in.take(in.get_le<std::uint32_t>()));
    const auto rank = in.get_le<std::uint32_t>();
    if (rank > 8) {
      throw IoError("checkpoint tensor '" + nt.name + "' has rank " +
                    std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& d : shape) {
      d = static_cast<std::size_t>(in.get_le<std::uint64_t>());
    }
    if (shape_size(shape) > in.remaining() / sizeof(double)) {
      throw IoError("checkpoint tensor '" + nt.name + "' " +
                    shape_string(shape) + " exceeds the remaining bytes");
    }
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) {
      v = std::bit_cast<double>(in.get_le<std::uint64_t>());
    }
    nt.tensor = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  if (!in.done()) {
    throw IoError("checkpoint has trailing bytes");
  }
  return out;
}

void save_tensors(const std::filesystem::path& path,
                  const std::vector<NamedTensor>& tensors) {
  write_file_atomic(path, encode_tensors(tensors));
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  return decode_tensors(read_file(path));
}

}  // namespace hexnas::numcore
