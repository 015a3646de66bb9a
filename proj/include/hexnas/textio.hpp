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

// Small text and file helpers shared by the CSV writers.

#ifndef HEXNAS_TEXTIO_HPP_
#define HEXNAS_TEXTIO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hexnas {

// Shortest decimal that parses back to exactly `v`.
std::string format_real(double v);

std::optional<double> parse_real(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace hexnas

#endif  // HEXNAS_TEXTIO_HPP_
